use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::Label;

use super::curves::{pr_curve, roc_curve};
use super::metrics::{summary_metrics, ConfusionCounts, MetricsBundle, SummaryMetrics};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    BalancedAccuracy,
    Mcc,
    Precision,
    Recall,
}

impl Criterion {
    pub fn of(self, m: &SummaryMetrics) -> f64 {
        match self {
            Criterion::BalancedAccuracy => m.balanced_accuracy,
            Criterion::Mcc => m.mcc,
            Criterion::Precision => m.precision,
            Criterion::Recall => m.recall,
        }
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "balanced_accuracy" | "bal_accuracy" => Ok(Criterion::BalancedAccuracy),
            "mcc" => Ok(Criterion::Mcc),
            "precision" => Ok(Criterion::Precision),
            "recall" => Ok(Criterion::Recall),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub counts: ConfusionCounts,
    pub metrics: MetricsBundle,
}

/// Confusion counts of the rule `score >= threshold => bot`.
pub fn counts_at(scores: &[f64], labels: &[Label], threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&s, &l) in scores.iter().zip(labels) {
        c.record(Label::from_bool(s >= threshold), l);
    }
    c
}

/// Candidate thresholds: every distinct score plus 0, ascending.
pub fn candidate_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = scores.iter().copied().chain([0.0]).collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Picks the threshold maximizing `criterion` for the rule
/// `score >= threshold => bot`. Ties go to the smallest threshold.
pub fn threshold_rule_sweep(
    scores: &[f64],
    labels: &[Label],
    criterion: Criterion,
) -> Result<ThresholdResult, EvalError> {
    // also validates lengths, classes and NaNs
    let roc = roc_curve(scores, labels)?;
    let pr = pr_curve(scores, labels)?;

    let mut sorted: Vec<(f64, bool)> = scores.iter().zip(labels).map(|(&s, l)| (s, l.is_bot())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    // bots_below[i] = bots among the i lowest scores
    let mut bots_below = vec![0usize; n + 1];
    for (i, &(_, b)) in sorted.iter().enumerate() {
        bots_below[i + 1] = bots_below[i] + usize::from(b);
    }
    let total_bots = bots_below[n];

    let mut best: Option<(f64, ConfusionCounts, SummaryMetrics)> = None;
    for th in candidate_thresholds(scores) {
        let below = sorted.partition_point(|&(s, _)| s < th);
        let fn_ = bots_below[below];
        let tn = below - fn_;
        let tp = total_bots - fn_;
        let fp = (n - below) - tp;
        let counts = ConfusionCounts { tp, fp, tn, fn_ };
        let m = summary_metrics(&counts);
        if best.as_ref().is_none_or(|(_, _, b)| criterion.of(&m) > criterion.of(b)) {
            best = Some((th, counts, m));
        }
    }
    let (threshold, counts, summary) = best.expect("at least one candidate");
    Ok(ThresholdResult {
        threshold,
        counts,
        metrics: MetricsBundle::new(summary, pr.auc, roc.auc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Bot as B, Human as H};

    #[test]
    fn separable_sweep() {
        let r = threshold_rule_sweep(&[0.1, 0.2, 0.8, 0.9], &[H, H, B, B], Criterion::BalancedAccuracy).unwrap();
        assert_eq!(r.threshold, 0.8);
        assert_eq!(r.metrics.balanced_accuracy, 1.0);
    }

    #[test]
    fn adversarial_ordering_falls_back_to_zero() {
        let r = threshold_rule_sweep(&[0.1, 0.2, 0.8, 0.9], &[B, B, H, H], Criterion::BalancedAccuracy).unwrap();
        assert_eq!(r.threshold, 0.0);
        assert_eq!(r.metrics.balanced_accuracy, 0.5);
        assert_eq!(r.metrics.recall, 1.0);
    }

    #[test]
    fn zero_threshold_flags_everything() {
        let c = counts_at(&[0.0, 0.3, 0.7], &[B, H, B], 0.0);
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (2, 1, 0, 0));
    }

    #[test]
    fn single_class_rejected() {
        assert!(threshold_rule_sweep(&[0.1, 0.2], &[B, B], Criterion::Mcc).is_err());
    }
}
