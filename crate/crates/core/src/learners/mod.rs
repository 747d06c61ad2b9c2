//! The five classifiers behind one train/score interface.
//!
//! Defaults follow the usual toolkit defaults: 1-nearest neighbour, 100-tree
//! forest with `floor(log2 d) + 1` features per split, Gaussian naive Bayes,
//! RIPPER with two optimization passes, and a one-hidden-layer perceptron
//! (learning rate 0.3, momentum 0.2, 500 epochs).

mod forest;
mod knn;
mod mlp;
mod naive_bayes;
mod ripper;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::features::{FeatureMatrix, FeatureSchema, FeatureVector};
use crate::ingest::Label;

pub use forest::{default_features_per_split, RandomForest, RandomTree};
pub use knn::Knn;
pub use mlp::{Mlp, MlpParams};
pub use naive_bayes::NaiveBayes;
pub use ripper::{Condition, Op, Ripper, RipperParams, Rule, ScoredRule};

pub const MODEL_FORMAT: &str = "botlens-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("training data is empty")]
    Empty,
    #[error("{rows} rows but {labels} labels")]
    RowLabelMismatch { rows: usize, labels: usize },
    #[error("non-finite value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },
    #[error("instance schema does not match the model's training schema")]
    SchemaMismatch,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("unsupported model container: {0}")]
    Format(String),
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mlp,
    Ripper,
    NaiveBayes,
    RandomForest,
    Knn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Mlp,
        Algorithm::Ripper,
        Algorithm::NaiveBayes,
        Algorithm::RandomForest,
        Algorithm::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Mlp => "mlp",
            Algorithm::Ripper => "ripper",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::RandomForest => "random_forest",
            Algorithm::Knn => "knn",
        }
    }

    /// Name used in rendered tables.
    pub fn title(self) -> &'static str {
        match self {
            Algorithm::Mlp => "MLP",
            Algorithm::Ripper => "JRip",
            Algorithm::NaiveBayes => "NaiveBayes",
            Algorithm::RandomForest => "RandomForest",
            Algorithm::Knn => "IBk",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "mlp" | "multilayer_perceptron" => Ok(Algorithm::Mlp),
            "ripper" | "jrip" | "rule_ripper" => Ok(Algorithm::Ripper),
            "naive_bayes" | "naivebayes" | "nb" => Ok(Algorithm::NaiveBayes),
            "random_forest" | "randomforest" | "rf" => Ok(Algorithm::RandomForest),
            "knn" | "ibk" => Ok(Algorithm::Knn),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Hyperparameters {
    Mlp(MlpParams),
    Ripper(RipperParams),
    NaiveBayes,
    RandomForest {
        trees: usize,
        /// `None` means `floor(log2 d) + 1`.
        features_per_split: Option<usize>,
    },
    Knn {
        k: usize,
    },
}

impl Hyperparameters {
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Mlp => Hyperparameters::Mlp(MlpParams::default()),
            Algorithm::Ripper => Hyperparameters::Ripper(RipperParams::default()),
            Algorithm::NaiveBayes => Hyperparameters::NaiveBayes,
            Algorithm::RandomForest => Hyperparameters::RandomForest {
                trees: 100,
                features_per_split: None,
            },
            Algorithm::Knn => Hyperparameters::Knn { k: 1 },
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Hyperparameters::Mlp(_) => Algorithm::Mlp,
            Hyperparameters::Ripper(_) => Algorithm::Ripper,
            Hyperparameters::NaiveBayes => Algorithm::NaiveBayes,
            Hyperparameters::RandomForest { .. } => Algorithm::RandomForest,
            Hyperparameters::Knn { .. } => Algorithm::Knn,
        }
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::InvalidHyperparameter(m.to_string()));
        match self {
            Hyperparameters::Knn { k } if *k < 1 => bad("k must be >= 1"),
            Hyperparameters::RandomForest { trees, .. } if *trees < 1 => bad("trees must be >= 1"),
            Hyperparameters::RandomForest {
                features_per_split: Some(0),
                ..
            } => bad("features_per_split must be >= 1"),
            Hyperparameters::Mlp(p) if p.epochs < 1 => bad("epochs must be >= 1"),
            Hyperparameters::Mlp(p) if p.learning_rate.is_nan() || p.learning_rate <= 0.0 => {
                bad("learning rate must be > 0")
            }
            Hyperparameters::Mlp(p) if p.hidden == Some(0) => bad("hidden units must be >= 1"),
            Hyperparameters::Ripper(p) if !(p.grow_fraction > 0.0 && p.grow_fraction < 1.0) => {
                bad("grow fraction must lie in (0,1)")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        LearnerSpec {
            hyperparameters: Hyperparameters::default_for(algorithm),
            seed,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.hyperparameters.algorithm()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedState {
    Mlp(Mlp),
    Ripper(Ripper),
    NaiveBayes(NaiveBayes),
    RandomForest(RandomForest),
    Knn(Knn),
}

impl FittedState {
    fn score(&self, x: &[f64]) -> f64 {
        let s = match self {
            FittedState::Mlp(m) => m.score(x),
            FittedState::Ripper(m) => m.score(x),
            FittedState::NaiveBayes(m) => m.score(x),
            FittedState::RandomForest(m) => m.score(x),
            FittedState::Knn(m) => m.score(x),
        };
        s.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Probability-like score for the bot class.
    pub score: f64,
    pub label: Label,
}

impl Prediction {
    /// Scores of exactly 0.5 are labeled bot.
    pub fn from_score(score: f64) -> Self {
        Prediction {
            score,
            label: Label::from_bool(score >= 0.5),
        }
    }
}

/// A trained classifier. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub spec: LearnerSpec,
    pub schema: Arc<FeatureSchema>,
    pub state: FittedState,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    model: Model,
}

fn validate_training(matrix: &FeatureMatrix) -> Result<Vec<bool>, LearnerError> {
    if matrix.rows.len() != matrix.labels.len() {
        return Err(LearnerError::RowLabelMismatch {
            rows: matrix.rows.len(),
            labels: matrix.labels.len(),
        });
    }
    if matrix.is_empty() {
        return Err(LearnerError::Empty);
    }
    for (row, values) in matrix.rows.iter().enumerate() {
        if let Some(feature) = values.iter().position(|v| !v.is_finite()) {
            return Err(LearnerError::NonFinite { row, feature });
        }
    }
    let is_bot: Vec<bool> = matrix.labels.iter().map(|l| l.is_bot()).collect();
    let bots = is_bot.iter().filter(|b| **b).count();
    if bots == 0 || bots == is_bot.len() {
        return Err(LearnerError::SingleClass);
    }
    Ok(is_bot)
}

pub fn train(spec: &LearnerSpec, matrix: &FeatureMatrix) -> Result<Model, LearnerError> {
    train_with(spec, matrix, Execution::default())
}

/// Like [`train`], choosing how the forest's trees are grown.
pub fn train_with(spec: &LearnerSpec, matrix: &FeatureMatrix, exec: Execution) -> Result<Model, LearnerError> {
    spec.hyperparameters.validate()?;
    let is_bot = validate_training(matrix)?;
    let rows = &matrix.rows;
    let state = match &spec.hyperparameters {
        Hyperparameters::Mlp(p) => FittedState::Mlp(Mlp::fit(rows, &is_bot, p, spec.seed)),
        Hyperparameters::Ripper(p) => FittedState::Ripper(Ripper::fit(rows, &is_bot, p, spec.seed)),
        Hyperparameters::NaiveBayes => FittedState::NaiveBayes(NaiveBayes::fit(rows, &is_bot)),
        Hyperparameters::RandomForest {
            trees,
            features_per_split,
        } => FittedState::RandomForest(RandomForest::fit(
            rows,
            &is_bot,
            *trees,
            *features_per_split,
            spec.seed,
            exec,
        )),
        Hyperparameters::Knn { k } => FittedState::Knn(Knn::fit(rows, &is_bot, *k)),
    };
    Ok(Model {
        spec: *spec,
        schema: matrix.schema.clone(),
        state,
    })
}

impl Model {
    pub fn score(&self, instance: &FeatureVector) -> Result<Prediction, LearnerError> {
        if *instance.schema != *self.schema {
            return Err(LearnerError::SchemaMismatch);
        }
        Ok(Prediction::from_score(self.state.score(&instance.values)))
    }

    /// Scores a raw row assumed to follow the model's schema.
    pub fn score_values(&self, values: &[f64]) -> Prediction {
        Prediction::from_score(self.state.score(values))
    }

    pub fn score_batch(&self, matrix: &FeatureMatrix) -> Result<Vec<Prediction>, LearnerError> {
        if *matrix.schema != *self.schema {
            return Err(LearnerError::SchemaMismatch);
        }
        Ok(matrix.rows.iter().map(|r| self.score_values(r)).collect())
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<(), LearnerError> {
        let container = Container {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_writer(writer, &container)?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Model, LearnerError> {
        let container: Container = serde_json::from_reader(reader)?;
        if container.format != MODEL_FORMAT {
            return Err(LearnerError::Format(format!("format `{}`", container.format)));
        }
        if container.version != MODEL_VERSION {
            return Err(LearnerError::Format(format!("version {}", container.version)));
        }
        Ok(container.model)
    }
}
