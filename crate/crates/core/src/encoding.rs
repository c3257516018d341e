//! Key generation and trap-bit encoding.
//!
//! The secret key is a uniformly random set of `n` trap positions among
//! `m + n` slots together with `n` random trap values. Traps are prepared in
//! the diagonal basis, message bits in the rectilinear basis, and message
//! order is preserved across the non-trap slots.

use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::ln_choose;
use crate::qubit::{Basis, Qubit};
use crate::scalar::Real;
use crate::{Error, Result};

pub type Bits = BitVec<u64, Lsb0>;

pub fn bits_to_string(bits: &BitSlice<u64, Lsb0>) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub fn bits_from_str(s: &str) -> Result<Bits> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidBitString(s.to_owned())),
        })
        .collect()
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Bits {
    let mut bits = Bits::with_capacity(len);
    let mut remaining = len;
    while remaining > 0 {
        let word: u64 = rng.gen();
        let take = remaining.min(64);
        bits.extend_from_bitslice(&word.view_bits::<Lsb0>()[..take]);
        remaining -= take;
    }
    bits
}

/// Classical message of `m >= 1` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    bits: Bits,
}

impl Message {
    pub fn new(bits: Bits) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyMessage);
        }
        Ok(Self { bits })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        Self::new(bits.iter().copied().collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(Bits::repeat(false, len))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new(random_bits(len, rng))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    pub fn with_flipped(&self, index: usize) -> Self {
        let mut bits = self.bits.clone();
        let old = bits[index];
        bits.set(index, !old);
        Self { bits }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.bits))
    }
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(bits_from_str(s)?)
    }
}

/// The verifier's secret: trap positions (strictly increasing) and values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KeyRecord", into = "KeyRecord")]
pub struct SecretKey {
    total_length: usize,
    trap_positions: Vec<usize>,
    trap_values: Bits,
}

impl SecretKey {
    pub fn new(total_length: usize, trap_positions: Vec<usize>, trap_values: Bits) -> Result<Self> {
        if trap_positions.is_empty() {
            return Err(Error::InvalidKey("at least one trap is required".into()));
        }
        if trap_positions.len() != trap_values.len() {
            return Err(Error::InvalidKey(format!(
                "{} positions but {} values",
                trap_positions.len(),
                trap_values.len()
            )));
        }
        if !trap_positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidKey("positions must be strictly increasing".into()));
        }
        if trap_positions.last().is_some_and(|&p| p >= total_length) {
            return Err(Error::InvalidKey("position beyond total length".into()));
        }
        if trap_positions.len() == total_length {
            return Err(Error::InvalidKey("no room for message bits".into()));
        }
        Ok(Self { total_length, trap_positions, trap_values })
    }

    pub fn total_length(&self) -> usize {
        self.total_length
    }

    /// Message length.
    pub fn m(&self) -> usize {
        self.total_length - self.trap_positions.len()
    }

    /// Number of traps.
    pub fn n(&self) -> usize {
        self.trap_positions.len()
    }

    pub fn trap_positions(&self) -> &[usize] {
        &self.trap_positions
    }

    pub fn trap_values(&self) -> &BitSlice<u64, Lsb0> {
        &self.trap_values
    }

    pub fn traps(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.trap_positions.iter().copied().zip(self.trap_values.iter().by_vals())
    }

    /// Index into the trap list when `position` holds a trap.
    pub fn trap_index(&self, position: usize) -> Option<usize> {
        self.trap_positions.binary_search(&position).ok()
    }

    pub fn is_trap(&self, position: usize) -> bool {
        self.trap_index(position).is_some()
    }

    /// One bit per slot, set on trap slots.
    pub fn trap_mask(&self) -> Bits {
        let mut mask = Bits::repeat(false, self.total_length);
        for &p in &self.trap_positions {
            mask.set(p, true);
        }
        mask
    }

    /// Slots carrying message bits, in message order.
    pub fn message_positions(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.trap_mask();
        (0..self.total_length).filter(move |&p| !mask[p])
    }
}

/// JSON layout shared by the CLI for persisting instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyRecord {
    pub m: usize,
    pub n: usize,
    pub trap_positions: Vec<usize>,
    pub trap_values: String,
}

impl From<SecretKey> for KeyRecord {
    fn from(key: SecretKey) -> Self {
        Self {
            m: key.m(),
            n: key.n(),
            trap_values: bits_to_string(&key.trap_values),
            trap_positions: key.trap_positions,
        }
    }
}

impl TryFrom<KeyRecord> for SecretKey {
    type Error = Error;

    fn try_from(rec: KeyRecord) -> Result<Self> {
        if rec.trap_positions.len() != rec.n {
            return Err(Error::InvalidKey(format!("n={} but {} positions", rec.n, rec.trap_positions.len())));
        }
        SecretKey::new(rec.m + rec.n, rec.trap_positions, bits_from_str(&rec.trap_values)?)
    }
}

/// A key together with the message it protects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(flatten)]
    pub key: SecretKey,
    #[serde(with = "message_string")]
    pub message: Message,
}

mod message_string {
    use super::Message;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Message, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(m)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Message, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Samples a uniformly random `n`-subset of `0..m+n` with uniform trap values.
pub fn generate_key<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<SecretKey> {
    if m == 0 || n == 0 {
        return Err(Error::DegenerateParameters { m, n });
    }
    let total = m + n;
    let mut positions = sample_positions(total, n, rng);
    positions.sort_unstable();
    let values = random_bits(n, rng);
    SecretKey::new(total, positions, values)
}

/// Uniform `k`-subset of `0..len` (partial Fisher-Yates), unsorted.
pub fn sample_positions<R: Rng + ?Sized>(len: usize, k: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(k <= len);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..k {
        let j = rng.gen_range(i..len);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyLength<T> {
    /// `n + log2 C(m+n, n)`.
    pub exact: T,
    /// `n log2 m`; absent when `m = 0`.
    pub approx: Option<T>,
}

impl<T: Real> KeyLength<T> {
    pub fn relative_error(&self) -> Option<T> {
        self.approx.map(|a| ((a - self.exact) / self.exact).abs())
    }
}

/// Secret key length in bits for `m` message bits and `n` traps.
pub fn key_length_bits<T: Real>(m: usize, n: usize) -> KeyLength<T> {
    let exact =
        if n == 0 { T::zero() } else { T::from_f64_lossy(n as f64 + ln_choose(m + n, n) / std::f64::consts::LN_2) };
    let approx = (m > 0).then(|| T::from_usize_lossy(n) * T::from_usize_lossy(m).log2());
    KeyLength { exact, approx }
}

/// The transmitted state `ρ(M, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState<T> {
    qubits: Vec<Qubit<T>>,
}

impl<T: Real> EncodedState<T> {
    pub fn from_qubits(qubits: Vec<Qubit<T>>) -> Self {
        Self { qubits }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn qubits(&self) -> &[Qubit<T>] {
        &self.qubits
    }

    pub fn qubits_mut(&mut self) -> &mut [Qubit<T>] {
        &mut self.qubits
    }

    pub fn qubit(&self, position: usize) -> &Qubit<T> {
        &self.qubits[position]
    }
}

pub fn encode<T: Real>(message: &Message, key: &SecretKey) -> Result<EncodedState<T>> {
    let expected = message.len() + key.n();
    if key.total_length() != expected {
        return Err(Error::LengthMismatch { expected, actual: key.total_length() });
    }
    let mut message_bits = message.iter();
    let mut traps = key.traps().peekable();
    let qubits = (0..key.total_length())
        .map(|p| match traps.peek() {
            Some(&(tp, value)) if tp == p => {
                traps.next();
                Qubit::prepare(value, Basis::Diagonal)
            }
            _ => Qubit::prepare(message_bits.next().expect("length checked"), Basis::Rectilinear),
        })
        .collect();
    Ok(EncodedState { qubits })
}

/// Measures every non-trap slot in the rectilinear basis, in order.
pub fn decode_non_trap<T: Real, R: Rng + ?Sized>(
    state: &EncodedState<T>,
    key: &SecretKey,
    rng: &mut R,
) -> Result<Message> {
    check_length(state, key)?;
    let bits = key.message_positions().map(|p| state.qubits[p].measure(Basis::Rectilinear, rng).0).collect();
    Message::new(bits)
}

pub(crate) fn check_length<T>(state: &EncodedState<T>, key: &SecretKey) -> Result<()> {
    if state.qubits.len() != key.total_length() {
        return Err(Error::LengthMismatch { expected: key.total_length(), actual: state.qubits.len() });
    }
    Ok(())
}
