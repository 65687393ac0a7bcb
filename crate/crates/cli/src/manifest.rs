//! Run manifest written next to every command's outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    /// Crate and file-format versions.
    pub versions: BTreeMap<String, String>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    /// Files written by the run, relative to the output directory.
    pub files: Vec<String>,
    /// Command-specific results.
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        let versions = [
            ("sparse-eit", env!("CARGO_PKG_VERSION")),
            ("sparse-eit-cli", env!("CARGO_PKG_VERSION")),
            ("dataset-format", sparse_eit::forward::DATASET_FORMAT),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect();
        RunManifest {
            command: command.to_owned(),
            config_hash: config.hash(),
            seed: config.seed,
            versions,
            timings: BTreeMap::new(),
            files: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    /// Runs `f`, recording its duration under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(phase.to_owned(), start.elapsed().as_secs_f64());
        out
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.summary.insert(key.to_owned(), v);
    }

    pub fn add_file(&mut self, name: &str) {
        self.files.push(name.to_owned());
    }

    /// Writes `manifest.json` into `dir` after checking that every listed file
    /// exists.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        for f in &self.files {
            if !dir.join(f).is_file() {
                return Err(CliError::Output {
                    what: "manifest",
                    message: format!("listed file {f} is missing"),
                });
            }
        }
        self.files.push(MANIFEST_FILE.to_owned());
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Output {
            what: "manifest",
            message: e.to_string(),
        })?;
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Output {
            what: "manifest",
            message: e.to_string(),
        })
    }
}
