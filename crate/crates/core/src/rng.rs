//! Seed derivation.
//!
//! Every stochastic step in a run draws from its own generator, seeded from the
//! run seed and a tag path. Adding or removing draws in one step never shifts
//! the stream seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `base` with each tag in order.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(base), |acc, &t| splitmix(acc ^ splitmix(t)))
}

pub fn rng_for(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// Stream tags.
pub mod tag {
    pub const INIT: u64 = 1;
    pub const HOLDOUT: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const RESAMPLE: u64 = 4;
    pub const COMMITTEE: u64 = 5;
    pub const RANDOM_QUERY: u64 = 6;
}
