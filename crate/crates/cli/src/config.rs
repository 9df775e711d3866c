//! Configuration documents.
//!
//! Every command reads an optional JSON config, applies command-line flags
//! on top of it (a flag always wins over the same key in the file), then
//! validates the result against the command's schema. Relative paths are
//! resolved against the directory holding the config file, or against the
//! working directory for paths given on the command line. The effective
//! config, with absolute paths, is written next to the outputs.

use crate::error::{CliError, CliResult};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// A config document before schema validation.
#[derive(Debug, Clone)]
pub struct RawConfig {
    pub value: Value,
    /// Directory that relative paths in the file are resolved against.
    pub base: PathBuf,
}

impl RawConfig {
    pub fn empty() -> CliResult<Self> {
        Ok(Self {
            value: Value::Object(Map::new()),
            base: current_dir()?,
        })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Self::empty();
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: invalid JSON: {e}", path.display())))?;
        if !value.is_object() {
            return Err(CliError::config(format!("config {}: top level must be an object", path.display())));
        }
        let base = absolute(path)?.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { value, base })
    }

    fn root(&mut self) -> &mut Map<String, Value> {
        self.value.as_object_mut().expect("config root is an object")
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.root().insert(key.to_owned(), v.into());
    }

    pub fn set_opt<T: Into<Value>>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.set(key, v);
        }
    }

    /// Sets `outer.inner`, creating `outer` when absent.
    pub fn set_nested(&mut self, outer: &str, inner: &str, v: impl Into<Value>) -> CliResult<()> {
        let entry = self
            .root()
            .entry(outer.to_owned())
            .or_insert_with(|| Value::Object(Map::new()));
        match entry.as_object_mut() {
            Some(obj) => {
                obj.insert(inner.to_owned(), v.into());
                Ok(())
            }
            None => Err(CliError::config(format!("config: `{outer}` must be an object"))),
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.value.get(key).is_some()
    }

    /// Deserializes into the command schema; errors carry the field path.
    pub fn parse<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_path_to_error::deserialize(&self.value).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::config(format!("config: {}", e.inner()))
            } else {
                CliError::config(format!("config: at `{path}`: {}", e.inner()))
            }
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

fn current_dir() -> CliResult<PathBuf> {
    std::env::current_dir().map_err(|e| CliError::config(format!("cannot determine working directory: {e}")))
}

pub fn absolute(p: &Path) -> CliResult<PathBuf> {
    if p.is_absolute() {
        Ok(p.to_path_buf())
    } else {
        Ok(current_dir()?.join(p))
    }
}

/// Canonical JSON: keys sorted, no whitespace.
pub fn canonical_json<T: Serialize>(v: &T) -> CliResult<String> {
    // serde_json's map is ordered by key, so a round trip through `Value` sorts
    let value = serde_json::to_value(v).map_err(|e| CliError::config(format!("cannot serialize config: {e}")))?;
    Ok(value.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(sha256_hex(canonical_json(v)?.as_bytes()))
}
