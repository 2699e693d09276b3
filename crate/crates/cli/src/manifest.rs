//! Run manifests: what was run, on which inputs, with which seed, producing which files.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written as `manifest.json` beside the outputs. Timestamps are the only fields that
/// differ between reruns; outputs carry hashes so reproduction can be checked.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Hash over every input file, in argument order.
    pub config_sha256: String,
    pub inputs: Vec<InputRecord>,
    pub seed: u64,
    pub tool_version: String,
    pub core_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn start(command: &str, inputs: &[(PathBuf, Vec<u8>)], seed: u64) -> Self {
        let mut all = Sha256::new();
        let inputs = inputs
            .iter()
            .map(|(p, bytes)| {
                all.update(bytes);
                InputRecord {
                    path: p.clone(),
                    sha256: sha256_hex(bytes),
                }
            })
            .collect();
        Self {
            command: command.into(),
            config_sha256: hex::encode(all.finalize()),
            inputs,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            core_version: dirset_core::VERSION.into(),
            started_unix: unix_now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Writes `bytes` to `path` and records it.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        std::fs::write(path, bytes)?;
        self.outputs.push(OutputRecord {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn finish(mut self, dir: &Path) -> std::io::Result<()> {
        self.finished_unix = unix_now();
        let text = serde_json::to_string_pretty(&self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}
