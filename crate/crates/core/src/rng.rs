//! Named, reproducible random streams.
//!
//! All randomness in a run flows from one root seed. Each consumer asks for a
//! sub-stream by label ("ou-noise", "minibatch", "cycle-shuffle", ...), so a
//! component can be re-seeded or perturbed without disturbing the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a deterministic sub-seed from a root seed and a label.
///
/// SplitMix64 over the root seed and the label bytes; stable across runs and
/// platforms.
pub fn sub_seed(root: u64, label: &str) -> u64 {
    let mut h = root ^ 0x9e37_79b9_7f4a_7c15;
    for &b in label.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h)
}

/// A seeded generator for the given stream label.
pub fn stream(root: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(root, label))
}

/// A seeded generator for a numbered element of a stream family
/// (e.g. per-episode cycle shuffles).
pub fn indexed_stream(root: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(indexed_seed(root, label, index))
}

/// The seed behind [`indexed_stream`], for APIs that take a seed.
pub fn indexed_seed(root: u64, label: &str, index: u64) -> u64 {
    splitmix64(sub_seed(root, label) ^ index)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
