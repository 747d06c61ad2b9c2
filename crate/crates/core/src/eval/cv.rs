use serde::{Deserialize, Serialize};

use crate::exec::{mix_seed, Execution};
use crate::features::{build_feature_matrix_with, FeatureMatrix, FeatureParams, FeatureSet, DEFAULT_WINDOW};
use crate::ingest::{assemble_training_set, Label, LabeledDataset};
use crate::learners::{train_with, LearnerSpec};

use super::curves::{pr_curve, roc_curve, CurveSeries};
use super::folds::stratified_folds;
use super::metrics::{summary_metrics, ConfusionCounts, MetricsBundle};
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Metrics over the pooled held-out predictions.
    pub metrics: MetricsBundle,
    pub counts: ConfusionCounts,
    pub roc: CurveSeries,
    pub pr: CurveSeries,
    /// Metrics of each fold on its own.
    pub per_fold: Vec<MetricsBundle>,
    /// Held-out score of every instance, in dataset order.
    pub scores: Vec<f64>,
    pub labels: Vec<Label>,
}

impl CvResult {
    /// Mean of the per-fold metrics, the alternative to pooling.
    pub fn fold_averaged(&self) -> MetricsBundle {
        MetricsBundle::mean(&self.per_fold).expect("at least two folds")
    }
}

fn bundle(
    scores: &[f64],
    labels: &[Label],
) -> Result<(MetricsBundle, ConfusionCounts, CurveSeries, CurveSeries), EvalError> {
    let mut counts = ConfusionCounts::default();
    for (&s, &l) in scores.iter().zip(labels) {
        counts.record(Label::from_bool(s >= 0.5), l);
    }
    let roc = roc_curve(scores, labels)?;
    let pr = pr_curve(scores, labels)?;
    let metrics = MetricsBundle::new(summary_metrics(&counts), pr.auc, roc.auc);
    Ok((metrics, counts, roc, pr))
}

/// Stratified k-fold cross-validation on a prepared matrix. Fold `f` trains
/// with seed `mix_seed(spec.seed, f)`; results do not depend on `exec`.
pub fn cross_validate_matrix(
    matrix: &FeatureMatrix,
    spec: &LearnerSpec,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<CvResult, EvalError> {
    let plan = stratified_folds(&matrix.labels, k, seed)?;
    let folds = exec.map_indexed(k, |fold| -> Result<(Vec<usize>, Vec<f64>), EvalError> {
        let train_idx = plan.train_indices(fold);
        let test_idx = plan.test_indices(fold);
        let fold_spec = spec.with_seed(mix_seed(spec.seed, fold as u64));
        let model = train_with(&fold_spec, &matrix.select(&train_idx), exec)?;
        let scores = test_idx
            .iter()
            .map(|&i| model.score_values(&matrix.rows[i]).score)
            .collect();
        Ok((test_idx, scores))
    });
    let mut scores = vec![0.0; matrix.len()];
    let mut per_fold = Vec::with_capacity(k);
    for fold in folds {
        let (idx, fold_scores) = fold?;
        let fold_labels: Vec<Label> = idx.iter().map(|&i| matrix.labels[i]).collect();
        per_fold.push(bundle(&fold_scores, &fold_labels)?.0);
        for (i, s) in idx.into_iter().zip(fold_scores) {
            scores[i] = s;
        }
    }
    let (metrics, counts, roc, pr) = bundle(&scores, &matrix.labels)?;
    Ok(CvResult {
        metrics,
        counts,
        roc,
        pr,
        per_fold,
        scores,
        labels: matrix.labels.clone(),
    })
}

pub fn cross_validate(
    dataset: &LabeledDataset,
    feature_set: FeatureSet,
    params: &FeatureParams,
    spec: &LearnerSpec,
    k: usize,
    seed: u64,
) -> Result<CvResult, EvalError> {
    cross_validate_with(dataset, feature_set, params, spec, k, seed, Execution::default())
}

pub fn cross_validate_with(
    dataset: &LabeledDataset,
    feature_set: FeatureSet,
    params: &FeatureParams,
    spec: &LearnerSpec,
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<CvResult, EvalError> {
    let matrix = build_feature_matrix_with(dataset, feature_set, params, exec)?;
    cross_validate_matrix(&matrix, spec, k, seed, exec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub min_posts: usize,
    pub window: usize,
    pub bots: usize,
    pub humans: usize,
    pub roc_auc: f64,
}

/// Timeline window used at a given minimum-posts threshold:
/// `min(threshold, 400)`, or 400 when no minimum is imposed.
pub fn window_for(min_posts: usize) -> usize {
    if min_posts == 0 {
        DEFAULT_WINDOW
    } else {
        min_posts.min(DEFAULT_WINDOW)
    }
}

/// ROC-AUC of one learner as the minimum timeline length varies.
#[allow(clippy::too_many_arguments)]
pub fn min_posts_sensitivity(
    name: &str,
    bot_source: &LabeledDataset,
    human_source: &LabeledDataset,
    feature_set: FeatureSet,
    params: &FeatureParams,
    spec: &LearnerSpec,
    thresholds: &[usize],
    require_cap: bool,
    k: usize,
    seed: u64,
) -> Result<Vec<SensitivityRow>, EvalError> {
    if !thresholds.windows(2).all(|w| w[0] <= w[1]) {
        return Err(EvalError::UnsortedThresholds);
    }
    let mut rows = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let set = assemble_training_set(name, bot_source, human_source, require_cap, t)?;
        if set.bot_count() == 0 || set.human_count() == 0 {
            return Err(EvalError::EmptyClassAtThreshold(t));
        }
        let window = window_for(t);
        let p = FeatureParams {
            window,
            ..params.clone()
        };
        let cv = cross_validate(&set, feature_set, &p, spec, k, seed)?;
        rows.push(SensitivityRow {
            min_posts: t,
            window,
            bots: set.bot_count(),
            humans: set.human_count(),
            roc_auc: cv.metrics.roc_auc,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSchema;
    use crate::learners::Algorithm;

    fn separable(n: usize) -> FeatureMatrix {
        FeatureMatrix::new(
            FeatureSchema::numeric(["x"]),
            (0..n)
                .map(|i| {
                    let jitter = (i % 7) as f64 / 7.0;
                    vec![if i >= n / 2 { 20.0 + jitter } else { jitter }]
                })
                .collect(),
            (0..n).map(|i| Label::from_bool(i >= n / 2)).collect(),
        )
    }

    #[test]
    fn pooled_counts_cover_dataset() {
        let m = separable(60);
        let r = cross_validate_matrix(
            &m,
            &LearnerSpec::new(Algorithm::NaiveBayes, 1),
            10,
            3,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.counts.total(), 60);
        assert_eq!(r.per_fold.len(), 10);
        assert_eq!(r.metrics.roc_auc, 1.0);
        assert_eq!(r.metrics.balanced_accuracy, 1.0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let m = separable(80);
        let spec = LearnerSpec::new(Algorithm::RandomForest, 5);
        let a = cross_validate_matrix(&m, &spec, 5, 9, Execution::Sequential).unwrap();
        let b = cross_validate_matrix(&m, &spec, 5, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k_larger_than_class_fails() {
        let m = separable(10);
        let err = cross_validate_matrix(&m, &LearnerSpec::new(Algorithm::Knn, 0), 10, 0, Execution::Sequential);
        assert!(matches!(err, Err(EvalError::ClassSmallerThanK { .. })));
    }

    #[test]
    fn windows() {
        assert_eq!(window_for(100), 100);
        assert_eq!(window_for(400), 400);
        assert_eq!(window_for(1000), 400);
        assert_eq!(window_for(0), 400);
    }
}
