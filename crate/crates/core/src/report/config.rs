//! Experiment configuration.
//!
//! A JSON document; every key except `training_sets` is optional:
//!
//! ```json
//! {
//!   "training_sets": [
//!     { "name": "Verified-Botwiki", "bots": "botwiki.jsonl", "humans": "verified.jsonl" }
//!   ],
//!   "feature_sets": ["cap_uni_star", "class_a", "class_b", "client"],
//!   "algorithms": ["mlp", "ripper", "naive_bayes", "random_forest", "knn"],
//!   "k": 10, "seed": 1, "min_posts": 400, "window": 400,
//!   "require_cap": true, "clients": "official_clients.txt",
//!   "cap": { "base_prior": 0.15, "domain_prior": null },
//!   "out": "out"
//! }
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::eval::Criterion;
use crate::features::{ClientRegistry, FeatureParams, FeatureSet, DEFAULT_BASE_PRIOR, DEFAULT_WINDOW};
use crate::learners::Algorithm;

use super::ReportError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSetRecipe {
    pub name: String,
    pub bots: PathBuf,
    pub humans: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapOverrides {
    #[serde(default = "default_base_prior")]
    pub base_prior: f64,
    #[serde(default)]
    pub domain_prior: Option<f64>,
}

impl Default for CapOverrides {
    fn default() -> Self {
        CapOverrides {
            base_prior: DEFAULT_BASE_PRIOR,
            domain_prior: None,
        }
    }
}

fn default_base_prior() -> f64 {
    DEFAULT_BASE_PRIOR
}

fn default_feature_sets() -> Vec<String> {
    FeatureSet::ALL.iter().map(|f| f.as_str().to_string()).collect()
}

fn default_algorithms() -> Vec<String> {
    Algorithm::ALL.iter().map(|a| a.as_str().to_string()).collect()
}

fn default_k() -> usize {
    10
}

fn default_seed() -> u64 {
    1
}

fn default_min_posts() -> usize {
    400
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_true() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_thresholds() -> Vec<usize> {
    vec![100, 200, 300, 400]
}

fn default_ratio() -> f64 {
    1.5
}

fn default_top() -> usize {
    5
}

fn default_criterion() -> String {
    "balanced_accuracy".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub training_sets: Vec<TrainingSetRecipe>,
    #[serde(default = "default_feature_sets")]
    pub feature_sets: Vec<String>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_min_posts")]
    pub min_posts: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Drop accounts without a CAP score, as the CAP feature set needs them.
    #[serde(default = "default_true")]
    pub require_cap: bool,
    #[serde(default)]
    pub clients: Option<PathBuf>,
    #[serde(default)]
    pub cap: CapOverrides,
    /// Reference instant for account age; defaults to the newest timestamp in each set.
    #[serde(default)]
    pub reference_time: Option<DateTime<Utc>>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_thresholds")]
    pub sensitivity_thresholds: Vec<usize>,
    #[serde(default = "default_ratio")]
    pub subsample_ratio: f64,
    #[serde(default = "default_top")]
    pub rank_top: usize,
    #[serde(default = "default_criterion")]
    pub criterion: String,
    /// Parse account files in strict mode.
    #[serde(default)]
    pub strict: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Validation(format!("config: {e}")))
    }

    /// Loads a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ReportError::Validation(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for ts in &mut self.training_sets {
            fix(&mut ts.bots);
            fix(&mut ts.humans);
        }
        if let Some(c) = &mut self.clients {
            fix(c);
        }
        fix(&mut self.out);
    }

    pub fn parsed_feature_sets(&self) -> Result<Vec<FeatureSet>, ReportError> {
        self.feature_sets
            .iter()
            .map(|s| s.parse().map_err(ReportError::Validation))
            .collect()
    }

    pub fn parsed_algorithms(&self) -> Result<Vec<Algorithm>, ReportError> {
        self.algorithms
            .iter()
            .map(|s| s.parse().map_err(ReportError::Validation))
            .collect()
    }

    pub fn parsed_criterion(&self) -> Result<Criterion, ReportError> {
        self.criterion.parse().map_err(ReportError::Validation)
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<(), ReportError> {
        let invalid = |m: String| Err(ReportError::Validation(m));
        if self.training_sets.is_empty() {
            return invalid("no training sets configured".into());
        }
        if self.k < 2 {
            return invalid(format!("k must be at least 2, got {}", self.k));
        }
        if self.window == 0 {
            return invalid("window must be positive".into());
        }
        if self.subsample_ratio.is_nan() || self.subsample_ratio < 1.0 {
            return invalid(format!("subsample_ratio must be >= 1, got {}", self.subsample_ratio));
        }
        if self.cap.base_prior.is_nan() || self.cap.base_prior <= 0.0 {
            return invalid("cap.base_prior must be positive".into());
        }
        if let Some(p) = self.cap.domain_prior {
            if !(p > 0.0 && p <= 1.0) {
                return invalid(format!("cap.domain_prior must lie in (0,1], got {p}"));
            }
        }
        if !self.sensitivity_thresholds.windows(2).all(|w| w[0] <= w[1]) {
            return invalid("sensitivity_thresholds must be ascending".into());
        }
        self.parsed_feature_sets()?;
        self.parsed_algorithms()?;
        self.parsed_criterion()?;
        let mut names = std::collections::HashSet::new();
        for ts in &self.training_sets {
            if !names.insert(&ts.name) {
                return invalid(format!("duplicate training set `{}`", ts.name));
            }
            for p in [&ts.bots, &ts.humans] {
                if !p.is_file() {
                    return invalid(format!("{}: file not found", p.display()));
                }
            }
        }
        if let Some(c) = &self.clients {
            if !c.is_file() {
                return invalid(format!("{}: file not found", c.display()));
            }
        }
        Ok(())
    }

    pub fn feature_params(&self) -> Result<FeatureParams, ReportError> {
        let registry = match &self.clients {
            Some(path) => ClientRegistry::from_file(path).map_err(|e| ReportError::Validation(e.to_string()))?,
            None => ClientRegistry::default(),
        };
        Ok(FeatureParams {
            window: self.window,
            registry,
            base_prior: self.cap.base_prior,
            domain_prior: self.cap.domain_prior,
            reference_time: self.reference_time,
            ..FeatureParams::default()
        })
    }
}
