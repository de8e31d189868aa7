//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` whose seed is derived
//! from a base seed plus a path of integer labels (epoch, batch, problem,
//! read, ...). Derivation uses the splitmix64 finalizer, so sibling streams
//! are decorrelated and results never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and one label.
pub fn derive(seed: u64, label: u64) -> u64 {
    splitmix(splitmix(seed) ^ label.wrapping_mul(GOLDEN))
}

/// Derives a child seed from a path of labels.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &l| derive(s, l))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
