//! Deterministic random streams.
//!
//! Every parallel task gets its own ChaCha8 stream keyed by
//! (master seed, task index), so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream `index` under `master`.
pub fn stream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Mixes a seed with a label into a new, well-separated master seed
/// (splitmix64 finaliser).
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut z = master ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
