use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::io::write_json;

/// Provenance record written next to every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub input: Option<PathBuf>,
    pub config: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub rng: Option<&'static str>,
    pub timing: Timing,
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// Wall time of each iteration, or of each row for sweeps.
    pub per_iteration_seconds: Vec<f64>,
}

impl RunManifest {
    pub fn new(command: &'static str, input: Option<&Path>, config: serde_json::Value) -> Self {
        RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            input: input.map(Path::to_path_buf),
            config,
            outputs: Vec::new(),
            seed: None,
            rng: None,
            timing: Timing::default(),
        }
    }

    /// Writes the manifest to `<out stem>.manifest.json` and returns its path.
    pub fn write_beside(&self, out: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(out);
        write_json(&path, self)?;
        Ok(path)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
