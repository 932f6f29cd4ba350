//! Run manifests: what was run, on which inputs, and what it produced.
//!
//! A manifest is written next to the outputs of every command, including
//! failed ones.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub version: String,
    pub config_sha256: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub inputs: Vec<InputDigest>,
    pub started: String,
    pub finished: Option<String>,
    pub outputs: Vec<PathBuf>,
    pub status: String,
    pub error: Option<FailureRecord>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, arguments: Vec<String>, seed: u64, threads: Option<usize>) -> Self {
        Self {
            command: command.into(),
            arguments,
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: None,
            seed,
            threads,
            inputs: Vec::new(),
            started: now(),
            finished: None,
            outputs: Vec::new(),
            status: "running".into(),
            error: None,
        }
    }

    /// Records an input file and its digest.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        if role == "config" {
            self.config_sha256 = Some(sha256.clone());
        }
        self.inputs.push(InputDigest { role: role.into(), path: path.to_path_buf(), sha256 });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(&mut self, outcome: Option<&CliError>) {
        self.finished = Some(now());
        match outcome {
            None => self.status = "ok".into(),
            Some(e) => {
                self.status = "failed".into();
                self.error = Some(FailureRecord { message: e.to_string(), exit_code: e.exit_code() });
            }
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
