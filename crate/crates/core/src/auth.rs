//! Wegman-Carter one-time authentication of the classical message.
//!
//! The hash is the polynomial `h_x(M) = Σ_{i=1..L} m_i x^i` over GF(2^s),
//! with blocks `m_i` taken from the message and a final block holding the
//! message length. Two distinct block sequences of length at most `L`
//! collide on at most `L` keys `x`, so masking with a one-time pad gives a
//! forgery probability of at most `L / 2^s`.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Message, Result};

/// Supported field sizes. `S4` exists for exhaustive testing only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSize {
    S4,
    S32,
    S64,
}

impl FieldSize {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            4 => Ok(FieldSize::S4),
            32 => Ok(FieldSize::S32),
            64 => Ok(FieldSize::S64),
            other => Err(Error::UnsupportedFieldSize(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            FieldSize::S4 => 4,
            FieldSize::S32 => 32,
            FieldSize::S64 => 64,
        }
    }

    /// Reduction polynomial including the leading term.
    pub fn modulus(self) -> u128 {
        match self {
            // x^4 + x + 1
            FieldSize::S4 => 0x13,
            // x^32 + x^7 + x^3 + x^2 + 1
            FieldSize::S32 => (1u128 << 32) | 0x8D,
            // x^64 + x^4 + x^3 + x + 1
            FieldSize::S64 => (1u128 << 64) | 0x1B,
        }
    }

    pub fn mask(self) -> u64 {
        match self {
            FieldSize::S64 => u64::MAX,
            s => (1u64 << s.bits()) - 1,
        }
    }

    fn check(self, value: u64) -> Result<u64> {
        if value & !self.mask() != 0 {
            return Err(Error::FieldOverflow(format!("{value:#x} exceeds {} bits", self.bits())));
        }
        Ok(value)
    }

    /// Product in GF(2^s).
    pub fn mul(self, a: u64, b: u64) -> u64 {
        let s = self.bits();
        let mut product = 0u128;
        let (a, mut b) = (a as u128, b);
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                product ^= a << shift;
            }
            b >>= 1;
            shift += 1;
        }
        let modulus = self.modulus();
        for i in (s..2 * s).rev() {
            if product >> i & 1 == 1 {
                product ^= modulus << (i - s);
            }
        }
        product as u64
    }

    /// Key material size in bits: hash key plus pad.
    pub fn key_bits(self) -> u32 {
        2 * self.bits()
    }

    fn hex_width(self) -> usize {
        (self.bits() as usize).div_ceil(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuthKey {
    field: FieldSize,
    hash_key: u64,
    pad: u64,
}

impl AuthKey {
    pub fn new(field: FieldSize, hash_key: u64, pad: u64) -> Result<Self> {
        Ok(Self { field, hash_key: field.check(hash_key)?, pad: field.check(pad)? })
    }

    pub fn random<R: Rng + ?Sized>(field: FieldSize, rng: &mut R) -> Self {
        let mask = field.mask();
        Self { field, hash_key: rng.gen::<u64>() & mask, pad: rng.gen::<u64>() & mask }
    }

    pub fn field(&self) -> FieldSize {
        self.field
    }

    pub fn hash_key(&self) -> u64 {
        self.hash_key
    }

    pub fn pad(&self) -> u64 {
        self.pad
    }

    /// Hash key followed by pad, each zero-padded to the field width.
    pub fn to_hex(&self) -> String {
        let w = self.field.hex_width();
        format!("{:0w$x}{:0w$x}", self.hash_key, self.pad)
    }

    pub fn from_hex(field: FieldSize, s: &str) -> Result<Self> {
        let w = field.hex_width();
        if s.len() != 2 * w || !s.is_ascii() {
            return Err(Error::InvalidHex(s.to_owned()));
        }
        let parse = |part: &str| u64::from_str_radix(part, 16).map_err(|_| Error::InvalidHex(s.to_owned()));
        Self::new(field, parse(&s[..w])?, parse(&s[w..])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuthTag {
    field: FieldSize,
    value: u64,
}

impl AuthTag {
    pub fn new(field: FieldSize, value: u64) -> Result<Self> {
        Ok(Self { field, value: field.check(value)? })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn to_hex(&self) -> String {
        format!("{:0w$x}", self.value, w = self.field.hex_width())
    }

    pub fn from_hex(field: FieldSize, s: &str) -> Result<Self> {
        if s.len() != field.hex_width() {
            return Err(Error::InvalidHex(s.to_owned()));
        }
        let v = u64::from_str_radix(s, 16).map_err(|_| Error::InvalidHex(s.to_owned()))?;
        Self::new(field, v)
    }
}

impl fmt::Display for AuthTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// `Σ_{i=1..L} blocks[i-1] · x^i` by Horner's rule.
pub fn poly_hash(field: FieldSize, blocks: &[u64], x: u64) -> u64 {
    blocks.iter().rev().fold(0, |acc, &b| field.mul(acc ^ b, x))
}

/// Splits the message into `s`-bit blocks (bit `j` of a block is message
/// bit `s*i + j`), zero-pads the last one and appends the bit length.
pub fn message_blocks(message: &Message, field: FieldSize) -> Result<Vec<u64>> {
    let s = field.bits() as usize;
    let len = message.len();
    if field != FieldSize::S64 && (len as u64) > field.mask() {
        return Err(Error::MessageTooLong { bits: len, field_bits: field.bits() });
    }
    let mut blocks: Vec<u64> = message
        .bits()
        .chunks(s)
        .map(|chunk| chunk.iter().by_vals().enumerate().fold(0u64, |acc, (j, b)| acc | (b as u64) << j))
        .collect();
    blocks.push(len as u64);
    Ok(blocks)
}

/// Number of hashed blocks for a message of `bits` bits, length block included.
pub fn block_count(bits: usize, field: FieldSize) -> usize {
    bits.div_ceil(field.bits() as usize) + 1
}

/// Tag over raw field blocks: `h_x(blocks) XOR pad`.
pub fn tag_blocks(blocks: &[u64], key: &AuthKey) -> AuthTag {
    AuthTag { field: key.field, value: poly_hash(key.field, blocks, key.hash_key) ^ key.pad }
}

pub fn tag(message: &Message, key: &AuthKey) -> Result<AuthTag> {
    Ok(tag_blocks(&message_blocks(message, key.field)?, key))
}

pub fn verify_tag(message: &Message, tag_value: &AuthTag, key: &AuthKey) -> bool {
    tag_value.field == key.field && tag(message, key).is_ok_and(|t| t.value == tag_value.value)
}

/// Caller-owned record of spent keys.
#[derive(Debug, Default)]
pub struct KeyLedger {
    used: HashSet<AuthKey>,
}

impl KeyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tags `message`, refusing a key that was already spent.
    pub fn tag_once(&mut self, message: &Message, key: &AuthKey) -> Result<AuthTag> {
        if self.used.contains(key) {
            return Err(Error::KeyReuse);
        }
        let t = tag(message, key)?;
        self.used.insert(*key);
        Ok(t)
    }

    pub fn is_spent(&self, key: &AuthKey) -> bool {
        self.used.contains(key)
    }
}

/// Hex-encoded tag and key as stored in run transcripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthRecord {
    pub field_bits: u32,
    pub tag: String,
    pub key: String,
}

impl AuthRecord {
    pub fn new(tag: &AuthTag, key: &AuthKey) -> Self {
        Self { field_bits: key.field.bits(), tag: tag.to_hex(), key: key.to_hex() }
    }

    pub fn decode(&self) -> Result<(AuthTag, AuthKey)> {
        let field = FieldSize::from_bits(self.field_bits)?;
        Ok((AuthTag::from_hex(field, &self.tag)?, AuthKey::from_hex(field, &self.key)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    /// GF(2)[x] polynomial remainder on bit-packed operands.
    fn poly_rem(mut a: u128, b: u128) -> u128 {
        let db = 127 - b.leading_zeros();
        while a != 0 && 127 - a.leading_zeros() >= db {
            a ^= b << (127 - a.leading_zeros() - db);
        }
        a
    }

    fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let r = poly_rem(a, b);
            a = b;
            b = r;
        }
        a
    }

    /// x^(2^k) in the field, by repeated squaring.
    fn frobenius_x(field: FieldSize, k: u32) -> u64 {
        (0..k).fold(2u64, |acc, _| field.mul(acc, acc))
    }

    #[test]
    fn reduction_polynomials_are_irreducible() {
        // Rabin: x^(2^s) = x mod p, and gcd(x^(2^(s/2)) - x, p) = 1 (s is a power of 2).
        for field in [FieldSize::S4, FieldSize::S32, FieldSize::S64] {
            let s = field.bits();
            assert_eq!(frobenius_x(field, s), 2, "{field:?}");
            let half = frobenius_x(field, s / 2) as u128 ^ 2;
            assert_eq!(poly_gcd(field.modulus(), half), 1, "{field:?}");
        }
    }

    #[test]
    fn gf16_hand_products() {
        let f = FieldSize::S4;
        assert_eq!(f.mul(0x3, 0x2), 0x6);
        // x^3 * x = x^4 = x + 1
        assert_eq!(f.mul(0x8, 0x2), 0x3);
        // (x^3 + 1)(x^3 + 1) = x^6 + 1 = x^3 + x^2 + 1
        assert_eq!(f.mul(0x9, 0x9), 0xD);
        for a in 1..16u64 {
            assert!((1..16u64).any(|b| f.mul(a, b) == 1), "{a} has an inverse");
        }
    }

    #[test]
    fn raw_block_tag_examples() {
        let key = AuthKey::new(FieldSize::S4, 0x2, 0x0).unwrap();
        assert_eq!(tag_blocks(&[0x3], &key).value(), 0x6);
        for hk in 0..16 {
            let key = AuthKey::new(FieldSize::S4, hk, 0xB).unwrap();
            assert_eq!(tag_blocks(&[0, 0, 0], &key).value(), 0xB);
        }
    }

    #[test]
    fn message_blocks_layout() {
        let msg: Message = "10110".parse().unwrap();
        assert_eq!(message_blocks(&msg, FieldSize::S4).unwrap(), vec![0b1101, 0b0, 5]);
        assert_eq!(block_count(5, FieldSize::S4), 3);
        let long = Message::zeros(16).unwrap();
        assert!(matches!(message_blocks(&long, FieldSize::S4), Err(Error::MessageTooLong { .. })));
        assert_eq!(message_blocks(&long, FieldSize::S64).unwrap(), vec![0, 16]);
    }

    #[test]
    fn padding_does_not_collide() {
        let key = AuthKey::new(FieldSize::S32, 0x1234_5678, 0).unwrap();
        let a: Message = "1".parse().unwrap();
        let b: Message = "10".parse().unwrap();
        assert_ne!(tag(&a, &key).unwrap(), tag(&b, &key).unwrap());
    }

    #[test]
    fn roundtrip_and_single_flip_rejection() {
        let mut rng = seeded(31);
        for _ in 0..2000 {
            let len = rng.gen_range(1..500);
            let msg = Message::random(len, &mut rng).unwrap();
            let key = AuthKey::random(FieldSize::S64, &mut rng);
            let t = tag(&msg, &key).unwrap();
            assert!(verify_tag(&msg, &t, &key));
            let flipped = msg.with_flipped(rng.gen_range(0..len));
            assert!(!verify_tag(&flipped, &t, &key));
        }
    }

    #[test]
    fn single_flip_detected_on_most_keys_exhaustively() {
        // s = 4, messages of up to 8 bits (L <= 3 blocks with the length block).
        let f = FieldSize::S4;
        for len in 1..=8usize {
            let l = block_count(len, f);
            for word in 0..(1u32 << len) {
                let bits: Vec<bool> = (0..len).map(|j| word >> j & 1 == 1).collect();
                let msg = Message::from_bools(&bits).unwrap();
                for j in 0..len {
                    let other = msg.with_flipped(j);
                    let mut undetected = 0;
                    for hk in 0..16 {
                        for pad in 0..16 {
                            let key = AuthKey::new(f, hk, pad).unwrap();
                            let t = tag(&msg, &key).unwrap();
                            undetected += verify_tag(&other, &t, &key) as usize;
                        }
                    }
                    assert!(undetected * 16 <= l * 256, "len {len} word {word} bit {j}");
                }
            }
        }
    }

    #[test]
    fn hex_roundtrip() {
        let key = AuthKey::new(FieldSize::S32, 0xdead_beef, 0x1).unwrap();
        assert_eq!(key.to_hex(), "deadbeef00000001");
        assert_eq!(AuthKey::from_hex(FieldSize::S32, &key.to_hex()).unwrap(), key);
        let t = AuthTag::new(FieldSize::S4, 0xa).unwrap();
        assert_eq!(t.to_hex(), "a");
        assert!(AuthTag::from_hex(FieldSize::S4, "zz").is_err());
        let rec = AuthRecord::new(&t, &AuthKey::new(FieldSize::S4, 1, 2).unwrap());
        assert_eq!(serde_json::to_string(&rec).unwrap(), r#"{"field_bits":4,"tag":"a","key":"12"}"#);
        assert_eq!(rec.decode().unwrap().0, t);
    }

    #[test]
    fn values_must_fit_field() {
        assert!(AuthKey::new(FieldSize::S4, 0x10, 0).is_err());
        assert!(AuthTag::new(FieldSize::S32, 1 << 32).is_err());
        assert!(FieldSize::from_bits(16).is_err());
    }

    #[test]
    fn ledger_refuses_reuse() {
        let mut ledger = KeyLedger::new();
        let key = AuthKey::new(FieldSize::S64, 7, 9).unwrap();
        let msg = Message::zeros(10).unwrap();
        ledger.tag_once(&msg, &key).unwrap();
        assert!(ledger.is_spent(&key));
        assert_eq!(ledger.tag_once(&msg, &key), Err(Error::KeyReuse));
    }

    #[test]
    fn key_size_is_independent_of_message_length() {
        let mut rng = seeded(1);
        for len in [1usize, 100, 10_000, 1_000_000] {
            let key = AuthKey::random(FieldSize::S64, &mut rng);
            let msg = Message::random(len, &mut rng).unwrap();
            assert!(verify_tag(&msg, &tag(&msg, &key).unwrap(), &key));
            assert_eq!(key.field().key_bits(), 128);
            assert_eq!(key.to_hex().len(), 32);
        }
    }
}
