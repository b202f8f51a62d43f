//! Reproducible random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator
//! keyed by a `(seed, stream)` pair. Replicates, segments and Monte Carlo
//! paths each get their own stream, so parallel execution reproduces the
//! serial output bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` under master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for replicate `index` of an experiment seeded with `master`.
///
/// SplitMix64 finaliser over the pair; distinct indices give unrelated seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
