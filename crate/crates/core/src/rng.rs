//! Deterministic RNG stream derivation.
//!
//! Every source of randomness in the planners is a ChaCha8 stream keyed by a
//! root seed plus structural coordinates (iteration, environment index, node
//! seed, ...). Batch size and worker scheduling therefore never change any
//! individual stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche for seed mixing.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mix an ordered tuple of coordinates into a single sub-seed.
pub fn mix(root: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix(root);
    for &c in coords {
        h = splitmix(h ^ c.wrapping_mul(0x9e3779b97f4a7c15));
    }
    h
}

/// Deterministic stream for the given coordinates.
pub fn stream(root: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(root, coords))
}
