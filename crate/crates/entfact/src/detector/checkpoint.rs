//! Versioned JSON checkpoints.
//!
//! JSON keeps the container debuggable; f64 values round-trip exactly through
//! serde_json's shortest-representation formatting.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DetectorError, DetectorParams};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    params: DetectorParams,
}

pub fn save_checkpoint(params: &DetectorParams, path: impl AsRef<Path>) -> Result<(), DetectorError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| DetectorError::WriteFailed {
        path: path.display().to_string(),
        source,
    })?;
    let w = BufWriter::new(file);
    serde_json::to_writer(
        w,
        &Checkpoint {
            version: CHECKPOINT_VERSION,
            params: params.clone(),
        },
    )
    .map_err(|e| DetectorError::MalformedCheckpoint(e.to_string()))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<DetectorParams, DetectorError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DetectorError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let r = BufReader::new(file);
    let ckpt: Checkpoint =
        serde_json::from_reader(r).map_err(|e| DetectorError::MalformedCheckpoint(e.to_string()))?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(DetectorError::MalformedCheckpoint(format!(
            "unsupported version {}",
            ckpt.version
        )));
    }
    Ok(ckpt.params)
}
