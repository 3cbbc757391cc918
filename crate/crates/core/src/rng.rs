//! Counter-based random substreams.
//!
//! Every Monte Carlo estimator splits its work into fixed-size chunks and
//! draws chunk `i` from the ChaCha stream `i` of a generator keyed by the
//! user seed. Chunk results are combined in chunk order, so estimates do not
//! depend on how rayon schedules the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per Monte Carlo chunk.
pub const CHUNK: usize = 1 << 14;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a label.
pub fn derive(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(0xD134_2543_DE82_EF95)))
}

/// Generator for stream `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Split `n` samples into `(chunk_index, len)` pairs of at most [`CHUNK`].
pub fn chunks(n: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|i| (i as u64, CHUNK.min(n - i * CHUNK)))
        .collect()
}
