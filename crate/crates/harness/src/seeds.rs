//! Counter-based seed tree: every `(arm, trial)` pair owns a ChaCha stream
//! derived from the root seed, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for `stream` under `root`.
pub fn stream_rng(root: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng
}

/// Packs an arm index and a trial index into one stream id.
pub fn stream_id(arm: u32, trial: u32) -> u64 {
    ((arm as u64) << 32) | trial as u64
}

pub fn trial_rng(root: u64, arm: u32, trial: u32) -> ChaCha8Rng {
    stream_rng(root, stream_id(arm, trial))
}
