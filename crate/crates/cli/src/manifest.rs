use crate::config::sha256_hex;
use crate::error::{CliError, CliResult};
use std::path::{Path, PathBuf};

/// Record of one command run, written as `manifest.json`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical effective config.
    pub config_hash: String,
    pub root_seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    pub inputs: Vec<InputFile>,
    pub workers: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
        })
    }
}

pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
