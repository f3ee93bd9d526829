use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hitsndiffs::io::write_json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of the invocation that produced a set of outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: u64,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value, seed: u64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, path: &Path) -> hitsndiffs::Result<()> {
        write_json(path, self)
    }
}

/// Manifest path for a single output file: `r.csv` gets `r.manifest.json`
/// beside it.
pub fn manifest_for_file(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{MANIFEST_FILE}"))
}
