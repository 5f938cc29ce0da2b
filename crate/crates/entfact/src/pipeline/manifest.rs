//! Stage manifests: config hash, seed, and content hashes of inputs/outputs.
//!
//! Manifests contain only deterministic fields so a rerun from the same
//! config and seed is byte-identical; wall time goes to the log instead.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineConfig, PipelineError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub input_hashes: BTreeMap<String, String>,
    pub output_hashes: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut file = std::fs::File::open(path).map_err(|e| PipelineError::Module {
        code: "io",
        message: format!("cannot hash {}: {e}", path.display()),
    })?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| PipelineError::Module {
            code: "io",
            message: format!("cannot hash {}: {e}", path.display()),
        })?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// SHA-256 of the resolved config's canonical JSON serialization.
pub fn config_hash(config: &PipelineConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn hash_files(paths: &[PathBuf]) -> Result<BTreeMap<String, String>, PipelineError> {
    let mut out = BTreeMap::new();
    for p in paths {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string());
        out.insert(name, sha256_file(p)?);
    }
    Ok(out)
}

pub fn manifest_path(output_dir: &Path, stage: &str) -> PathBuf {
    output_dir.join(format!("manifest-{stage}.json"))
}

pub fn write_manifest(manifest: &Manifest, output_dir: &Path) -> Result<PathBuf, PipelineError> {
    let path = manifest_path(output_dir, &manifest.stage);
    let json = serde_json::to_string(manifest).expect("manifest serializes");
    std::fs::write(&path, json).map_err(|e| PipelineError::Module {
        code: "io",
        message: format!("cannot write {}: {e}", path.display()),
    })?;
    Ok(path)
}
