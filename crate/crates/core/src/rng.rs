//! Deterministic stream RNGs.
//!
//! Every sampling entry point is keyed by a `(master seed, stream id)` pair
//! mapped onto a ChaCha8 counter stream, so replicate r can be generated
//! independently of every other replicate and results are bit-identical
//! regardless of thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::SeedState;

/// RNG for a given (master seed, stream) pair.
pub fn stream_rng(seed: SeedState) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master);
    rng.set_stream(seed.stream);
    rng
}
