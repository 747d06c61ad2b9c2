//! Experiment configuration and report emission.
//!
//! Each `run_*` function executes one CLI command against an
//! [`ExperimentConfig`] and returns a [`CommandReport`]; the binary only
//! parses flags and prints.

mod commands;
mod config;
mod manifest;
mod render;

use std::path::PathBuf;

use thiserror::Error;

use crate::eval::EvalError;
use crate::features::FeatureError;
use crate::ingest::IngestError;

pub use commands::{
    ingest_counts, load_sources, run_evaluate, run_ingest, run_rank, run_sensitivity, run_subsample, run_threshold,
    Source, INGEST_THRESHOLDS,
};
pub use config::{CapOverrides, ExperimentConfig, TrainingSetRecipe};
pub use manifest::{read_manifest, RunManifest, RunStatus, MANIFEST_FILE};
pub use render::{fmt3, round3, OutputFormat, Table};

#[derive(Debug, Error)]
pub enum ReportError {
    /// Bad configuration or input files; nothing was computed.
    #[error("{0}")]
    Validation(String),
    /// Failure while running an experiment.
    #[error("{0}")]
    Runtime(String),
}

impl ReportError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Validation(_) => 1,
            ReportError::Runtime(_) => 2,
        }
    }
}

impl From<IngestError> for ReportError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Read(_)
            | IngestError::AccountNotFound(_)
            | IngestError::Unauthorized(_)
            | IngestError::RetriesExhausted { .. } => ReportError::Runtime(e.to_string()),
            _ => ReportError::Validation(e.to_string()),
        }
    }
}

impl From<FeatureError> for ReportError {
    fn from(e: FeatureError) -> Self {
        ReportError::Runtime(e.to_string())
    }
}

impl From<EvalError> for ReportError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Ingest(inner) => inner.into(),
            other => ReportError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for ReportError {
    fn from(e: std::io::Error) -> Self {
        ReportError::Runtime(e.to_string())
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct CommandReport {
    /// Rendered table for the terminal.
    pub stdout: String,
    /// Non-fatal diagnostics, such as skipped malformed lines.
    pub warnings: Vec<String>,
    /// Files written, manifest excluded.
    pub files: Vec<PathBuf>,
    /// Set when some work failed after outputs were started.
    pub failure: Option<ReportError>,
}

impl CommandReport {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, ReportError::exit_code)
    }
}
