//! Run-directory management: every invocation writes into a fresh
//! directory, gets its effective config echoed beside the outputs, and
//! leaves a manifest naming each artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use nvspec_core::{CoreError, Result};

use crate::config::RunConfig;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    /// Logical artifact name to path relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
}

pub struct RunDir {
    pub path: PathBuf,
    manifest: RunManifest,
}

impl RunDir {
    /// Create `<out_dir>/<name>`, appending `-2`, `-3`, ... if taken.
    pub fn create(out_dir: &Path, name: &str, command: &str) -> Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| CoreError::io(out_dir, e))?;
        let mut path = out_dir.join(name);
        let mut suffix = 1u32;
        loop {
            match std::fs::create_dir(&path) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    suffix += 1;
                    path = out_dir.join(format!("{name}-{suffix}"));
                }
                Err(e) => return Err(CoreError::io(&path, e)),
            }
        }
        Ok(RunDir {
            path,
            manifest: RunManifest {
                schema_version: MANIFEST_SCHEMA_VERSION,
                command: command.to_string(),
                artifacts: BTreeMap::new(),
            },
        })
    }

    /// Echo the effective configuration next to the outputs.
    pub fn echo_config(&self, config: &RunConfig) -> Result<()> {
        let text = config.to_toml()?;
        let path = self.path.join("config.toml");
        std::fs::write(&path, text).map_err(|e| CoreError::io(&path, e))
    }

    /// Absolute path for a new artifact, recorded in the manifest.
    pub fn artifact(&mut self, name: &str, rel_path: &str) -> PathBuf {
        self.manifest
            .artifacts
            .insert(name.to_string(), rel_path.to_string());
        let full = self.path.join(rel_path);
        if let Some(parent) = full.parent() {
            let _ = std::fs::create_dir_all(parent);
        }
        full
    }

    pub fn write_manifest(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CoreError::Config(format!("manifest serialization: {e}")))?;
        let path = self.path.join("manifest.json");
        std::fs::write(&path, text + "\n").map_err(|e| CoreError::io(&path, e))
    }
}

/// Write any serializable value as pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CoreError::Config(format!("json serialization: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| CoreError::io(path, e))
}

/// Read a JSON file into a deserializable value.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })
}
