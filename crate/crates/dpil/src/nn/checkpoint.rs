//! Versioned JSON checkpoint container.
//!
//! Every trained model (denoiser, policy, discriminator) is stored as
//! `{version, kind, seed_lineage, payload}`. The seed lineage records which
//! root seed and stage tags produced the model.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub version: u32,
    pub kind: String,
    pub seed_lineage: Vec<String>,
    pub payload: T,
}

/// Writes atomically: temp file in the same directory, then rename.
pub fn save_checkpoint<T: Serialize>(
    path: &Path,
    kind: &str,
    seed_lineage: Vec<String>,
    payload: &T,
) -> Result<()> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        kind: kind.to_string(),
        seed_lineage,
        payload,
    };
    let json = serde_json::to_string_pretty(&ckpt)?;
    crate::harness::report::write_atomic(path, json.as_bytes())
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path, expected_kind: &str) -> Result<Checkpoint<T>> {
    let text = fs::read_to_string(path)?;
    let ckpt: Checkpoint<T> = serde_json::from_str(&text)?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::rejected(format!(
            "unsupported checkpoint version {} (expected {}) in {}",
            ckpt.version,
            CHECKPOINT_VERSION,
            path.display()
        )));
    }
    if ckpt.kind != expected_kind {
        return Err(Error::rejected(format!(
            "checkpoint kind {:?} does not match expected {:?} in {}",
            ckpt.kind,
            expected_kind,
            path.display()
        )));
    }
    Ok(ckpt)
}
