//! Reproducible random streams.
//!
//! Every stochastic routine draws from a ChaCha stream keyed by
//! `(seed, stream)`. Replication `i` of a simulation always uses stream `i`,
//! so results do not depend on how replications are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
