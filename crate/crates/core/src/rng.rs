//! Random streams.
//!
//! Every random quantity is drawn from a ChaCha20 generator keyed by a
//! 64-bit master seed and selected by a 64-bit stream id, so each replication
//! of an experiment can be reproduced on its own and in any order.

use rand::SeedableRng;
pub use rand_chacha::ChaCha20Rng;

/// Stream ids reserved by the experiment runners. Chain replications use
/// ids below [`STREAM_ROTATIONS`].
pub const STREAM_ROTATIONS: u64 = 1 << 40;
pub const STREAM_REFERENCE: u64 = 1 << 41;
pub const STREAM_AUX: u64 = 1 << 42;

/// The generator for stream `stream` under `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
