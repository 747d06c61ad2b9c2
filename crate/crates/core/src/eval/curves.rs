use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::Label;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Roc,
    Pr,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Roc => "roc",
            CurveKind::Pr => "pr",
        })
    }
}

/// ROC points are (false positive rate, true positive rate); PR points are
/// (recall, precision).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Cumulative (tp, fp) after each tie block, highest score first, plus the class totals.
type Blocks = (Vec<(usize, usize)>, usize, usize);

fn threshold_blocks(scores: &[f64], labels: &[Label]) -> Result<Blocks, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|l| l.is_bot()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    if let Some(bad) = scores.iter().find(|s| s.is_nan()) {
        return Err(EvalError::InvalidScore(*bad));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut blocks = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (k, &i) in order.iter().enumerate() {
        if labels[i].is_bot() {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_block = order.get(k + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_block {
            blocks.push((tp, fp));
        }
    }
    Ok((blocks, pos, neg))
}

/// ROC curve by a descending threshold sweep; tied scores move together, so
/// the trapezoidal area equals the Mann-Whitney statistic.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Result<CurveSeries, EvalError> {
    let (blocks, pos, neg) = threshold_blocks(scores, labels)?;
    let mut points = vec![(0.0, 0.0)];
    let mut area2 = 0u128;
    let (mut prev_tp, mut prev_fp) = (0usize, 0usize);
    for &(tp, fp) in &blocks {
        // Twice the trapezoid, in integer units of 1/(pos*neg).
        area2 += ((fp - prev_fp) * (tp + prev_tp)) as u128;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        (prev_tp, prev_fp) = (tp, fp);
    }
    let auc = area2 as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(CurveSeries {
        kind: CurveKind::Roc,
        points,
        auc,
    })
}

/// Precision-recall curve with step interpolation: the area is the sum of
/// precision times the recall gained at each threshold.
pub fn pr_curve(scores: &[f64], labels: &[Label]) -> Result<CurveSeries, EvalError> {
    let (blocks, pos, _) = threshold_blocks(scores, labels)?;
    let first_precision = blocks.first().map_or(1.0, |&(tp, fp)| tp as f64 / (tp + fp) as f64);
    let mut points = vec![(0.0, first_precision)];
    let mut auc = 0.0;
    let mut prev_recall = 0.0;
    for &(tp, fp) in &blocks {
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        auc += precision * (recall - prev_recall);
        points.push((recall, precision));
        prev_recall = recall;
    }
    Ok(CurveSeries {
        kind: CurveKind::Pr,
        points,
        auc,
    })
}
