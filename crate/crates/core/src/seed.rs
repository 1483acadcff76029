//! Seed derivation for replicated chains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream every sampler in this crate draws from.
pub type ChainRng = ChaCha8Rng;

/// SplitMix64 finalizer: a bijection on 64-bit words with good avalanche.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ index)
}

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

pub fn replica_rng(seed: u64, index: u64) -> ChainRng {
    rng_from_seed(derive_seed(seed, index))
}
