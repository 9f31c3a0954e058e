//! Run manifest: per-stage inputs, configuration, seeds and artifact
//! checksums, kept in `manifest.json` in the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{read_json, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: Vec<FileDigest>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub sub_seeds: BTreeMap<String, u64>,
    pub artifacts: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            stages: BTreeMap::new(),
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Path as recorded: relative to `out` when inside it, else as given.
pub fn display_path(path: &Path, out: &Path) -> String {
    path.strip_prefix(out)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

pub fn digest(path: &Path, out: &Path) -> Result<FileDigest> {
    Ok(FileDigest {
        path: display_path(path, out),
        sha256: sha256_file(path)?,
    })
}

impl Manifest {
    /// Loads the manifest in `out`, or starts a fresh one.
    pub fn open(out: &Path) -> Result<Self> {
        let path = out.join(MANIFEST_FILE);
        if path.exists() {
            read_json(&path)
        } else {
            Ok(Self::default())
        }
    }

    pub fn save(&self, out: &Path) -> Result<PathBuf> {
        let path = out.join(MANIFEST_FILE);
        write_json(&path, self)?;
        Ok(path)
    }

    /// Checks every recorded artifact against its checksum; returns the
    /// paths that are missing or differ.
    pub fn verify(&self, out: &Path) -> Vec<String> {
        let mut bad = Vec::new();
        for stage in self.stages.values() {
            for a in &stage.artifacts {
                match sha256_file(&out.join(&a.path)) {
                    Ok(h) if h == a.sha256 => {}
                    _ => bad.push(a.path.clone()),
                }
            }
        }
        bad
    }
}
