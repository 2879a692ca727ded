//! Deterministic random streams.
//!
//! Every stochastic routine takes a `seed_base` and a stream index. Streams are
//! ChaCha8 keystreams that share the key derived from `seed_base` and differ in
//! their stream counter, so per-seed work can be run in any order or in
//! parallel and still reproduce bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Returns the random stream `stream` of the family keyed by `seed_base`.
pub fn stream(seed_base: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_base);
    rng.set_stream(stream);
    rng
}

/// Uniform sample in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
