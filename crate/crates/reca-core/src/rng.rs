//! Seeded randomness. ChaCha8 is the engine's only entropy source: a
//! counter-based stream cipher whose output is identical on every platform
//! for a given (seed, stream) pair, and which can be forked into
//! independent streams without correlation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RNG for the given seed, stream 0.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the given seed on a numbered stream. Streams with the same seed
/// are independent; batch shuffling uses one stream per epoch so that epoch
/// k's order never depends on how much randomness epoch k-1 consumed.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}

/// A shuffled permutation of 0..n.
///
/// Fisher-Yates written out here so the exact sequence is pinned by this
/// crate, not by a dependency's shuffle internals.
pub fn shuffled_indices(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}
