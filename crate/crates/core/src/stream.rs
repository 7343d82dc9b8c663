//! Reproducible random streams.
//!
//! Every stochastic routine in this crate draws from a ChaCha8 stream keyed
//! by a `(seed, index)` pair: the seed identifies the run, the index the
//! replication (or worker task). Two streams with different indices are
//! independent, and a `(seed, index)` pair fully determines the sequence, so
//! parallel runs reduce deterministically no matter how work is scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Stream for replication `index` of the run keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
