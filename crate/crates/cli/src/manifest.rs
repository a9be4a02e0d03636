//! Run manifests recorded next to every output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub version: String,
    pub wall_time_seconds: f64,
}

pub struct ManifestBuilder {
    command: String,
    parameters: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    started: Instant,
}

fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

impl ManifestBuilder {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            seed,
            inputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Records the digest of a file, or of every file in a directory.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| CliError::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for f in files {
                self.inputs.push(digest_file(&f)?);
            }
        } else {
            self.inputs.push(digest_file(path)?);
        }
        Ok(())
    }

    pub fn finish(self) -> RunManifest {
        RunManifest {
            command: self.command,
            parameters: self.parameters,
            seed: self.seed,
            inputs: self.inputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}
