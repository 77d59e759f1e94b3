//! Seed plumbing. Every randomized operation takes one explicit `u64` seed;
//! sub-streams are derived by mixing, never by sharing a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed for `stream` from `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(stream.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

/// Seed of trial `trial` at grid point `point` of a sweep with base seed `base`.
pub fn trial_seed(base: u64, point: u64, trial: u64) -> u64 {
    derive_seed(derive_seed(base, point), trial)
}
