use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Reference to a file an invocation read or wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

/// Provenance sidecar written next to every artifact. Digests are
/// recomputable from the referenced files; rerunning a subcommand with
/// the same inputs and seed reproduces the same output digests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool: String,
    pub subcommand: String,
    pub created_utc: String,
    pub params: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, FileRef>,
    pub outputs: BTreeMap<String, FileRef>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::runtime(format!("cannot hash {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct ManifestBuilder {
    subcommand: String,
    params: BTreeMap<String, String>,
    inputs: BTreeMap<String, FileRef>,
    outputs: BTreeMap<String, FileRef>,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            params: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, name: &str, path: &Path) -> Result<&mut Self, CliError> {
        let digest = sha256_file(path)?;
        self.inputs.insert(
            name.to_string(),
            FileRef {
                path: path.display().to_string(),
                sha256: digest,
            },
        );
        Ok(self)
    }

    pub fn output(&mut self, name: &str, path: &Path) -> Result<&mut Self, CliError> {
        let digest = sha256_file(path)?;
        self.outputs.insert(
            name.to_string(),
            FileRef {
                path: path.display().to_string(),
                sha256: digest,
            },
        );
        Ok(self)
    }

    /// Writes `<anchor>.manifest.json` (or `manifest.json` inside a
    /// directory anchor) and returns the manifest.
    pub fn write(&self, anchor: &Path) -> Result<RunManifest, CliError> {
        // run id: stable hash of what was run on what, not when
        let mut id_src = self.subcommand.clone();
        for (k, v) in &self.params {
            id_src.push_str(&format!("|{k}={v}"));
        }
        for (k, f) in &self.inputs {
            id_src.push_str(&format!("|{k}:{}", f.sha256));
        }
        let manifest = RunManifest {
            run_id: sha256_hex(id_src.as_bytes())[..16].to_string(),
            tool: format!("bypasslab {}", env!("CARGO_PKG_VERSION")),
            subcommand: self.subcommand.clone(),
            created_utc: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            params: self.params.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        let path = manifest_path(anchor);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

pub fn manifest_path(anchor: &Path) -> PathBuf {
    if anchor.is_dir() {
        anchor.join("manifest.json")
    } else {
        let mut name = anchor.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        anchor.with_file_name(name)
    }
}

/// Reads the manifest sidecar of an artifact, if present.
pub fn read_manifest_for(artifact: &Path) -> Option<RunManifest> {
    let path = manifest_path(artifact);
    let content = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&content).ok()
}
