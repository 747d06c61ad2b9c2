//! Evaluation: stratified cross-validation, metrics and curves, the CAP
//! threshold rule, rebalancing, information-gain ranking and the
//! timeline-length sensitivity sweep.

mod curves;
mod cv;
mod folds;
mod infogain;
mod metrics;
mod subsample;
mod threshold;

use thiserror::Error;

use crate::features::FeatureError;
use crate::ingest::{IngestError, Label};
use crate::learners::LearnerError;

pub use curves::{pr_curve, roc_curve, CurveKind, CurveSeries};
pub use cv::{
    cross_validate, cross_validate_matrix, cross_validate_with, min_posts_sensitivity, window_for, CvResult,
    SensitivityRow,
};
pub use folds::{stratified_folds, FoldPlan};
pub use infogain::{bin_of, class_entropy, info_gain, info_gain_ranking, mdl_discretize, rank_matrix, RankedFeature};
pub use metrics::{confusion_counts, summary_metrics, ConfusionCounts, MetricsBundle, SummaryMetrics};
pub use subsample::spread_subsample;
pub use threshold::{candidate_thresholds, counts_at, threshold_rule_sweep, Criterion, ThresholdResult};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("invalid score {0}")]
    InvalidScore(f64),
    #[error("k must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("class {class} has {count} instances, fewer than k={k}")]
    ClassSmallerThanK { class: Label, count: usize, k: usize },
    #[error("ratio must be >= 1, got {0}")]
    InvalidRatio(f64),
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("min_posts={0} leaves a class empty")]
    EmptyClassAtThreshold(usize),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}
