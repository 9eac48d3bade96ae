//! Splittable seed schedule.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a 64-bit
//! seed derived from a master seed and a path of integer tags. Derivation is a
//! pure function, so streams never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of tags.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &tag| {
        splitmix64(acc ^ splitmix64(tag.wrapping_add(GOLDEN)))
    })
}

/// Opens a stream for `seed`.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Opens the stream for a derived seed.
pub fn substream(seed: u64, path: &[u64]) -> Stream {
    stream(derive(seed, path))
}
