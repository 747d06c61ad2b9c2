use serde::{Deserialize, Serialize};

use crate::ingest::Label;

use super::EvalError;

/// Confusion matrix with bots as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Bot, Label::Bot) => self.tp += 1,
            (Label::Bot, Label::Human) => self.fp += 1,
            (Label::Human, Label::Human) => self.tn += 1,
            (Label::Human, Label::Bot) => self.fn_ += 1,
        }
    }

    pub fn merge(self, other: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

pub fn confusion_counts(predicted: &[Label], actual: &[Label]) -> Result<ConfusionCounts, EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    let mut counts = ConfusionCounts::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        counts.record(p, a);
    }
    Ok(counts)
}

/// Threshold-dependent metrics. Every 0/0 ratio is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn summary_metrics(c: &ConfusionCounts) -> SummaryMetrics {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let tpr = ratio(tp, tp + fn_);
    let tnr = ratio(tn, tn + fp);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    SummaryMetrics {
        balanced_accuracy: (tpr + tnr) / 2.0,
        precision: ratio(tp, tp + fp),
        recall: tpr,
        mcc: ratio(tp * tn - fp * fn_, den),
    }
}

/// The six reported metrics for one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
    pub pr_auc: f64,
    pub roc_auc: f64,
}

impl MetricsBundle {
    pub fn new(summary: SummaryMetrics, pr_auc: f64, roc_auc: f64) -> Self {
        MetricsBundle {
            balanced_accuracy: summary.balanced_accuracy,
            precision: summary.precision,
            recall: summary.recall,
            mcc: summary.mcc,
            pr_auc,
            roc_auc,
        }
    }

    /// Values in report column order.
    pub fn values(&self) -> [f64; 6] {
        [
            self.balanced_accuracy,
            self.precision,
            self.recall,
            self.mcc,
            self.pr_auc,
            self.roc_auc,
        ]
    }

    /// Element-wise mean.
    pub fn mean(bundles: &[MetricsBundle]) -> Option<MetricsBundle> {
        if bundles.is_empty() {
            return None;
        }
        let n = bundles.len() as f64;
        let avg = |f: fn(&MetricsBundle) -> f64| bundles.iter().map(f).sum::<f64>() / n;
        Some(MetricsBundle {
            balanced_accuracy: avg(|b| b.balanced_accuracy),
            precision: avg(|b| b.precision),
            recall: avg(|b| b.recall),
            mcc: avg(|b| b.mcc),
            pr_auc: avg(|b| b.pr_auc),
            roc_auc: avg(|b| b.roc_auc),
        })
    }
}
