//! Deterministic randomness.
//!
//! Every run is driven by an explicitly seeded ChaCha stream. Trials inside
//! one experiment use separate streams of the same seed, so results do not
//! depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomSource = ChaCha8Rng;

pub fn seeded(seed: u64) -> RandomSource {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for trial `index` of the experiment seeded by `seed`.
pub fn trial_stream(seed: u64, index: u64) -> RandomSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Child seed number `counter` of `master` (splitmix64 finalizer).
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
