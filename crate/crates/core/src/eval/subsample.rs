use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ingest::{Label, LabeledDataset};

use super::EvalError;

/// Under-samples the majority class so it holds at most
/// `floor(max_ratio * minority)` instances. Every minority instance is kept
/// and the original order is preserved.
pub fn spread_subsample(dataset: &LabeledDataset, max_ratio: f64, seed: u64) -> Result<LabeledDataset, EvalError> {
    if max_ratio.is_nan() || max_ratio < 1.0 || max_ratio.is_infinite() {
        return Err(EvalError::InvalidRatio(max_ratio));
    }
    let (bots, humans) = (dataset.bot_count(), dataset.human_count());
    if bots == 0 || humans == 0 {
        return Err(EvalError::SingleClass);
    }
    let (majority, minority_count) = if bots > humans {
        (Label::Bot, humans)
    } else {
        (Label::Human, bots)
    };
    let majority_idx: Vec<usize> = dataset
        .accounts()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.label == majority)
        .map(|(i, _)| i)
        .collect();
    let cap = (max_ratio * minority_count as f64).floor() as usize;
    if majority_idx.len() <= cap {
        return Ok(dataset.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![true; dataset.len()];
    for &i in &majority_idx {
        keep[i] = false;
    }
    for pick in sample(&mut rng, majority_idx.len(), cap) {
        keep[majority_idx[pick]] = true;
    }
    let accounts = dataset
        .accounts()
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(a, _)| a.clone())
        .collect();
    Ok(LabeledDataset::new(dataset.name.clone(), accounts))
}
