//! Seed handling. Every stochastic routine takes an explicit 64-bit seed and
//! derives independent child streams by hashing `(seed, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `seed`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Seeded generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for child stream `index` of `seed`.
pub fn child_rng(seed: u64, index: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(seed, index))
}
