//! Deterministic seed derivation for independent random streams.
//!
//! Every randomized stage (each drop, each GA individual, each breeding
//! step) owns a stream whose seed is a hash of the master seed and the
//! stage's indices. Results therefore never depend on execution order or
//! on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function. Bijective on u64, good avalanche.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed with a tuple of stream indices.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &w in words {
        state = splitmix64(state ^ splitmix64(w));
    }
    state
}

/// Builds the RNG for the stream identified by `words` under `seed`.
pub fn stream(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, words))
}
