use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::binary_entropy;
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        p_bot: f64,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Unpruned decision tree grown on a bootstrap sample with random feature
/// subsets at each node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomTree {
    nodes: Vec<Node>,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best information-gain cut of `feature` over the instances in `idx`.
fn best_cut(rows: &[Vec<f64>], is_bot: &[bool], idx: &[usize], feature: usize) -> Option<SplitCandidate> {
    let mut order: Vec<(f64, bool)> = idx.iter().map(|&i| (rows[i][feature], is_bot[i])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = order.len();
    let total_pos = order.iter().filter(|(_, b)| *b).count();
    let parent = binary_entropy(total_pos, n);
    let mut best: Option<SplitCandidate> = None;
    let mut left_pos = 0;
    for i in 0..n - 1 {
        left_pos += usize::from(order[i].1);
        if order[i].0 == order[i + 1].0 {
            continue;
        }
        let nl = i + 1;
        let nr = n - nl;
        let child = (nl as f64 * binary_entropy(left_pos, nl) + nr as f64 * binary_entropy(total_pos - left_pos, nr))
            / n as f64;
        let gain = parent - child;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let threshold = order[i].0 + (order[i + 1].0 - order[i].0) / 2.0;
            best = Some(SplitCandidate {
                feature,
                threshold,
                gain,
            });
        }
    }
    best
}

impl RandomTree {
    pub fn fit(
        rows: &[Vec<f64>],
        is_bot: &[bool],
        sample: Vec<usize>,
        features_per_split: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let d = rows[0].len();
        let mut nodes = vec![Node::Leaf { p_bot: 0.0 }];
        let mut stack = vec![(0usize, sample)];
        let mut feature_order: Vec<usize> = (0..d).collect();
        while let Some((slot, idx)) = stack.pop() {
            let pos = idx.iter().filter(|&&i| is_bot[i]).count();
            let p_bot = pos as f64 / idx.len() as f64;
            if idx.len() < 2 || pos == 0 || pos == idx.len() {
                nodes[slot] = Node::Leaf { p_bot };
                continue;
            }
            // Examine `features_per_split` random features; keep going past
            // that only while no informative cut has been found.
            feature_order.shuffle(rng);
            let mut best: Option<SplitCandidate> = None;
            for (tried, &f) in feature_order.iter().enumerate() {
                if tried >= features_per_split && best.is_some() {
                    break;
                }
                if let Some(c) = best_cut(rows, is_bot, &idx, f) {
                    if c.gain > 0.0 && best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best else {
                nodes[slot] = Node::Leaf { p_bot };
                continue;
            };
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| rows[i][split.feature] <= split.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { p_bot: 0.0 });
            let right = nodes.len();
            nodes.push(Node::Leaf { p_bot: 0.0 });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, right_idx));
            stack.push((left, left_idx));
        }
        RandomTree { nodes }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p_bot } => return *p_bot,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<RandomTree>,
}

/// `floor(log2(d)) + 1`.
pub fn default_features_per_split(d: usize) -> usize {
    (usize::BITS - 1 - d.max(1).leading_zeros()) as usize + 1
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and feature subsets from `seed ^ t`.
    pub fn fit(
        rows: &[Vec<f64>],
        is_bot: &[bool],
        trees: usize,
        features_per_split: Option<usize>,
        seed: u64,
        exec: Execution,
    ) -> Self {
        let n = rows.len();
        let d = rows[0].len();
        let m = features_per_split
            .unwrap_or_else(|| default_features_per_split(d))
            .clamp(1, d);
        let trees = exec.map_indexed(trees, |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            RandomTree::fit(rows, is_bot, sample, m, &mut rng)
        });
        RandomForest { trees }
    }

    /// Mean of the trees' leaf bot probabilities.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[RandomTree] {
        &self.trees
    }

    #[cfg(test)]
    pub(crate) fn from_trees(trees: Vec<RandomTree>) -> Self {
        RandomForest { trees }
    }
}
