use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    /// `completed`, `halted_blowup` or `failed`.
    pub status: String,
    pub message: Option<String>,
    /// Command-specific summary numbers.
    pub summary: serde_json::Value,
}

pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
            started: now(),
            finished: 0.0,
            files: Vec::new(),
            status: "failed".into(),
            message: None,
            summary: serde_json::Value::Null,
        }
    }

    pub fn write(&mut self, dir: &Path) -> std::io::Result<()> {
        self.finished = now();
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}
