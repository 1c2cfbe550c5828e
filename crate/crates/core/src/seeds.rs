//! Seed derivation. Every random stream is addressed by `(seed, stream)` so
//! results never depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per independently seeded Monte Carlo chunk.
pub const CHUNK: usize = 4096;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for sub-experiment `index` of a run seeded with `seed`.
pub fn derive(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `(chunk index, chunk length)` pairs covering `n` samples.
pub fn chunks(n: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(CHUNK)).map(|c| (c as u64, CHUNK.min(n - c * CHUNK))).collect()
}
