//! Deterministic seed derivation.
//!
//! Every stochastic component receives its own seed derived from a master
//! seed and a path of integer coordinates (repetition, fold, tree index, ...).
//! The mixing function is SplitMix64, so derived streams are decorrelated and
//! independent of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a coordinate path.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream labels used as the first path element, so that two subsystems
/// sharing a master seed never collide.
pub mod stream {
    pub const OUTER_FOLDS: u64 = 1;
    pub const SELECTOR: u64 = 2;
    pub const INNER_FOLDS: u64 = 3;
    pub const CLASSIFIER: u64 = 4;
    pub const FINAL: u64 = 5;
    pub const TREE: u64 = 6;
}
