use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ReportError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Ok,
    Failed,
}

/// Record of one command run. Written before any result file and rewritten
/// after each one, so it lists exactly the files on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// An output directory with its manifest kept in sync.
pub(crate) struct RunOutput {
    dir: PathBuf,
    manifest: RunManifest,
}

impl RunOutput {
    pub fn begin(config: &ExperimentConfig, command: &str) -> Result<Self, ReportError> {
        fs::create_dir_all(&config.out).map_err(|e| ReportError::Runtime(format!("{}: {e}", config.out.display())))?;
        let out = RunOutput {
            dir: config.out.clone(),
            manifest: RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                started_at: stamp(Utc::now()),
                finished_at: None,
                seed: config.seed,
                status: RunStatus::Running,
                error: None,
                files: Vec::new(),
                config: config.clone(),
            },
        };
        out.save()?;
        Ok(out)
    }

    fn save(&self) -> Result<(), ReportError> {
        let path = self.dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(|e| ReportError::Runtime(format!("{}: {e}", path.display())))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `contents` to `name` and records it.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, ReportError> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| ReportError::Runtime(format!("{}: {e}", path.display())))?;
        self.record(name)?;
        Ok(path)
    }

    /// Records a file the caller wrote itself.
    pub fn record(&mut self, name: &str) -> Result<(), ReportError> {
        if !self.manifest.files.iter().any(|f| f == name) {
            self.manifest.files.push(name.to_string());
        }
        self.save()
    }

    pub fn finish(mut self, failure: Option<&ReportError>) -> Result<Vec<PathBuf>, ReportError> {
        self.manifest.finished_at = Some(stamp(Utc::now()));
        self.manifest.status = if failure.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Ok
        };
        self.manifest.error = failure.map(ToString::to_string);
        self.save()?;
        Ok(self.manifest.files.iter().map(|f| self.dir.join(f)).collect())
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, ReportError> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    serde_json::from_str(&text).map_err(|e| ReportError::Validation(e.to_string()))
}
