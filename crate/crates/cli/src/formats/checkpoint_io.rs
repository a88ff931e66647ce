//! Checkpoint file IO on top of the core binary encoding.

use anyhow::{Context, Result};
use contactrl_core::trainer::{
    decode_checkpoint, decode_summary, encode_checkpoint, Adam, Checkpoint, CheckpointSummary,
    Dtype,
};
use contactrl_core::policy::PolicyParams;
use std::path::Path;

use super::digest_bytes;

pub fn save(
    path: &Path,
    params: &PolicyParams,
    optimizer: Option<&Adam>,
    global_step: u64,
    config_digest: u64,
) -> Result<u64> {
    let bytes = encode_checkpoint(params, optimizer, global_step, config_digest, Dtype::F64);
    std::fs::write(path, &bytes)
        .with_context(|| format!("writing checkpoint {}", path.display()))?;
    Ok(digest_bytes(&bytes))
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading checkpoint {}", path.display()))?;
    decode_checkpoint(&bytes).map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn summary(path: &Path) -> Result<(CheckpointSummary, u64)> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading checkpoint {}", path.display()))?;
    let s = decode_summary(&bytes).map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((s, digest_bytes(&bytes)))
}

/// File hash used in output names derived from this checkpoint.
pub fn file_hash(path: &Path) -> Result<u64> {
    let bytes = std::fs::read(path)?;
    Ok(digest_bytes(&bytes))
}
