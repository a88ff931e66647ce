//! Serialized artifacts: plans, run configuration, episode logs, metric
//! tables and checkpoints.

pub mod checkpoint_io;
pub mod config;
pub mod episode;
pub mod plan_json;
pub mod table;

use contactrl_core::math::Fnv1a;

/// FNV-1a over arbitrary bytes; used for config digests and checkpoint file
/// hashes embedded in output names.
pub fn digest_bytes(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::new();
    h.update(bytes);
    h.finish()
}
