use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ingest::Label;

use super::EvalError;

/// Assignment of every instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Indices held out in `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Stratified k-fold plan. Each class is shuffled and dealt round-robin; the
/// second class resumes where the first stopped so fold sizes stay even.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFoldCount(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in [Label::Bot, Label::Human] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassSmallerThanK {
                class,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(bots: usize, humans: usize) -> Vec<Label> {
        std::iter::repeat_n(Label::Bot, bots)
            .chain(std::iter::repeat_n(Label::Human, humans))
            .collect()
    }

    fn per_fold(plan: &FoldPlan, labels: &[Label], class: Label) -> Vec<usize> {
        (0..plan.k)
            .map(|f| plan.test_indices(f).iter().filter(|&&i| labels[i] == class).count())
            .collect()
    }

    #[test]
    fn exact_divisibility() {
        let l = labels(30, 70);
        let plan = stratified_folds(&l, 10, 1).unwrap();
        assert!(per_fold(&plan, &l, Label::Bot).iter().all(|&c| c == 3));
        assert!(per_fold(&plan, &l, Label::Human).iter().all(|&c| c == 7));
    }

    #[test]
    fn near_balanced_split() {
        let l = labels(303, 308);
        let plan = stratified_folds(&l, 10, 7).unwrap();
        assert!(per_fold(&plan, &l, Label::Bot).iter().all(|c| (30..=31).contains(c)));
        assert!(per_fold(&plan, &l, Label::Human).iter().all(|c| (30..=31).contains(c)));
    }

    #[test]
    fn small_class_rejected() {
        let err = stratified_folds(&labels(5, 50), 10, 0).unwrap_err();
        assert!(matches!(err, EvalError::ClassSmallerThanK { count: 5, k: 10, .. }));
        assert!(stratified_folds(&labels(5, 5), 1, 0).is_err());
    }

    #[test]
    fn seeded() {
        let l = labels(40, 60);
        assert_eq!(stratified_folds(&l, 5, 3).unwrap(), stratified_folds(&l, 5, 3).unwrap());
        assert_ne!(stratified_folds(&l, 5, 3).unwrap(), stratified_folds(&l, 5, 4).unwrap());
    }
}
