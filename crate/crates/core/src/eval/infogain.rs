use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, class_count, entropy};
use crate::features::{build_feature_matrix, FeatureKind, FeatureMatrix, FeatureParams, FeatureSet};
use crate::ingest::{Label, LabeledDataset};

use super::EvalError;

fn mdl_split(sorted: &[(f64, bool)], cuts: &mut Vec<f64>) {
    let n = sorted.len();
    if n < 2 {
        return;
    }
    let total_pos = sorted.iter().filter(|(_, b)| *b).count();
    let mut best: Option<(f64, usize, usize)> = None; // (weighted entropy, left size, left positives)
    let mut left_pos = 0;
    for i in 1..n {
        left_pos += usize::from(sorted[i - 1].1);
        if sorted[i - 1].0 == sorted[i].0 {
            continue;
        }
        let w = (i as f64 * binary_entropy(left_pos, i) + (n - i) as f64 * binary_entropy(total_pos - left_pos, n - i))
            / n as f64;
        if best.is_none_or(|(b, _, _)| w < b) {
            best = Some((w, i, left_pos));
        }
    }
    let Some((weighted, split, lp)) = best else { return };
    let ent = binary_entropy(total_pos, n);
    let (ent_l, ent_r) = (binary_entropy(lp, split), binary_entropy(total_pos - lp, n - split));
    let (k, k1, k2) = (
        class_count(total_pos, n) as f64,
        class_count(lp, split) as f64,
        class_count(total_pos - lp, n - split) as f64,
    );
    let gain = ent - weighted;
    let delta = (3f64.powf(k) - 2.0).log2() - (k * ent - k1 * ent_l - k2 * ent_r);
    let threshold = (((n - 1) as f64).log2() + delta) / n as f64;
    if gain <= threshold {
        return;
    }
    let (left, right) = sorted.split_at(split);
    mdl_split(left, cuts);
    cuts.push(left[split - 1].0 + (right[0].0 - left[split - 1].0) / 2.0);
    mdl_split(right, cuts);
}

/// Entropy-based discretization with the MDL stopping rule. Returns cut
/// points (midpoints between adjacent distinct values) in ascending order;
/// empty when no cut pays for itself.
pub fn mdl_discretize(values: &[f64], labels: &[Label]) -> Result<Vec<f64>, EvalError> {
    if values.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            left: values.len(),
            right: labels.len(),
        });
    }
    if let Some(bad) = values.iter().find(|v| v.is_nan()) {
        return Err(EvalError::InvalidScore(*bad));
    }
    let mut sorted: Vec<(f64, bool)> = values.iter().zip(labels).map(|(&v, l)| (v, l.is_bot())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = Vec::new();
    mdl_split(&sorted, &mut cuts);
    Ok(cuts)
}

/// Bin index of `value`: the number of cuts strictly below it.
pub fn bin_of(cuts: &[f64], value: f64) -> usize {
    cuts.partition_point(|&c| c < value)
}

fn conditional_entropy(bins: &[usize], labels: &[Label]) -> f64 {
    let nbins = bins.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![[0usize; 2]; nbins];
    for (&b, l) in bins.iter().zip(labels) {
        counts[b][usize::from(l.is_bot())] += 1;
    }
    let n = labels.len() as f64;
    counts.iter().map(|c| (c[0] + c[1]) as f64 / n * entropy(c)).sum()
}

/// Class entropy in bits.
pub fn class_entropy(labels: &[Label]) -> f64 {
    let bots = labels.iter().filter(|l| l.is_bot()).count();
    binary_entropy(bots, labels.len())
}

/// Information gain of one attribute. Numeric attributes are discretized
/// first; boolean attributes are used as two bins.
pub fn info_gain(values: &[f64], labels: &[Label], kind: FeatureKind) -> Result<f64, EvalError> {
    let bots = labels.iter().filter(|l| l.is_bot()).count();
    if bots == 0 || bots == labels.len() {
        return Err(EvalError::SingleClass);
    }
    let bins: Vec<usize> = match kind {
        FeatureKind::Boolean => values.iter().map(|&v| usize::from(v != 0.0)).collect(),
        FeatureKind::Numeric => {
            let cuts = mdl_discretize(values, labels)?;
            values.iter().map(|&v| bin_of(&cuts, v)).collect()
        }
    };
    Ok((class_entropy(labels) - conditional_entropy(&bins, labels)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub name: String,
    pub feature_set: Option<FeatureSet>,
    pub gain: f64,
    /// Gain divided by the largest gain in the ranking.
    pub normalized: f64,
}

/// Ranks every column of `matrix` by information gain, highest first; ties
/// keep schema order.
pub fn rank_matrix(matrix: &FeatureMatrix) -> Result<Vec<RankedFeature>, EvalError> {
    let mut ranked = Vec::with_capacity(matrix.schema.len());
    for (j, (name, kind)) in matrix.schema.names().iter().zip(matrix.schema.kinds()).enumerate() {
        ranked.push(RankedFeature {
            name: name.clone(),
            feature_set: None,
            gain: info_gain(&matrix.column(j), &matrix.labels, *kind)?,
            normalized: 0.0,
        });
    }
    ranked.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    let max = ranked.first().map_or(0.0, |r| r.gain);
    for r in &mut ranked {
        r.normalized = if max > 0.0 { r.gain / max } else { 0.0 };
    }
    Ok(ranked)
}

/// Ranks all features of the given sets over one dataset.
pub fn info_gain_ranking(
    dataset: &LabeledDataset,
    feature_sets: &[FeatureSet],
    params: &FeatureParams,
) -> Result<Vec<RankedFeature>, EvalError> {
    let mut owners = Vec::new();
    let mut parts = Vec::new();
    for &fs in feature_sets {
        let m = build_feature_matrix(dataset, fs, params)?;
        owners.extend(std::iter::repeat_n(fs, m.schema.len()));
        parts.push(m);
    }
    if parts.is_empty() {
        return Ok(Vec::new());
    }
    let combined = FeatureMatrix::hstack(&parts);
    let mut ranked = rank_matrix(&combined)?;
    for r in &mut ranked {
        let j = combined.schema.names().iter().position(|n| *n == r.name).unwrap();
        r.feature_set = Some(owners[j]);
    }
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Bot as B, Human as H};

    #[test]
    fn separable_fixture_single_midpoint() {
        let cuts = mdl_discretize(&[0.1, 0.2, 0.8, 0.9], &[H, H, B, B]).unwrap();
        assert_eq!(cuts, vec![0.5]);
    }

    #[test]
    fn constant_values_no_cuts() {
        assert!(mdl_discretize(&[3.0; 6], &[H, B, H, B, H, B]).unwrap().is_empty());
    }

    #[test]
    fn checkerboard_no_cuts() {
        let values: Vec<f64> = (0..16).map(f64::from).collect();
        let labels: Vec<Label> = (0..16).map(|i| Label::from_bool(i % 2 == 0)).collect();
        assert!(mdl_discretize(&values, &labels).unwrap().is_empty());
    }

    #[test]
    fn identical_boolean_gains_one_bit() {
        let labels = [B, B, H, H];
        let g = info_gain(&[1.0, 1.0, 0.0, 0.0], &labels, FeatureKind::Boolean).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_attribute_gains_nothing() {
        let labels = [B, H, B, H];
        let g = info_gain(&[1.0, 1.0, 0.0, 0.0], &labels, FeatureKind::Boolean).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn bins() {
        assert_eq!(bin_of(&[0.5, 1.5], 0.5), 0);
        assert_eq!(bin_of(&[0.5, 1.5], 0.6), 1);
        assert_eq!(bin_of(&[0.5, 1.5], 9.0), 2);
    }
}
