use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Provenance record written next to (or embedded in) every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub settings: Value,
    /// SHA-256 of the compact JSON encoding of `command` and `settings`.
    pub input_hash: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, settings: Value) -> Self {
        let canonical = serde_json::to_vec(&serde_json::json!({ "command": command, "settings": settings }))
            .expect("manifest settings serialize");
        Self {
            command: command.to_string(),
            settings,
            input_hash: hex::encode(Sha256::digest(&canonical)),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: None,
        }
    }

    pub fn with_wall_time(&self, secs: f64) -> Self {
        Self { wall_time_s: Some(secs), ..self.clone() }
    }
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
