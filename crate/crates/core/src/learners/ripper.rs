//! RIPPER rule induction for numeric attributes.
//!
//! Rules are grown for the minority class with FOIL information gain, pruned
//! on a held-out third of the data, and the rule set is bounded by a minimum
//! description length criterion. Two optimization passes then consider a
//! replacement and a revision for every rule, keeping whichever variant gives
//! the smallest total description length.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Rule growth stops once total DL exceeds the best seen by this many bits.
const MAX_DL_SURPLUS: f64 = 64.0;
const THEORY_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipperParams {
    /// Fraction of each split used for growing; the rest prunes.
    pub grow_fraction: f64,
    pub min_covered: usize,
    pub optimization_passes: usize,
}

impl Default for RipperParams {
    fn default() -> Self {
        RipperParams {
            grow_fraction: 2.0 / 3.0,
            min_covered: 2,
            optimization_passes: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Le,
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub op: Op,
    pub value: f64,
}

impl Condition {
    fn holds(&self, x: &[f64]) -> bool {
        match self.op {
            Op::Le => x[self.feature] <= self.value,
            Op::Gt => x[self.feature] > self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
}

impl Rule {
    pub fn covers(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }

    fn prefix(&self, len: usize) -> Rule {
        Rule {
            conditions: self.conditions[..len].to_vec(),
        }
    }
}

/// A learned rule with the bot score assigned to instances it fires on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRule {
    pub rule: Rule,
    pub bot_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ripper {
    /// Whether rules predict the bot class (the minority at training time).
    pub target_is_bot: bool,
    /// Ordered decision list; the first covering rule decides.
    pub rules: Vec<ScoredRule>,
    pub default_bot_score: f64,
}

struct Learner<'a> {
    rows: &'a [Vec<f64>],
    /// Membership in the target class.
    pos: Vec<bool>,
    params: RipperParams,
    total_conditions: f64,
    exp_fp_rate: f64,
}

fn log2_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        x.log2()
    } else {
        0.0
    }
}

/// Bits to identify `k` elements out of `t` when each is chosen with probability `p`.
fn subset_dl(t: f64, k: f64, p: f64) -> f64 {
    let mut bits = 0.0;
    if k > 0.0 {
        bits -= k * log2_or_zero(p);
    }
    if t - k > 0.0 {
        bits -= (t - k) * log2_or_zero(1.0 - p);
    }
    bits
}

fn theory_dl(rule: &Rule, total_conditions: f64) -> f64 {
    let k = rule.conditions.len() as f64;
    if k == 0.0 {
        return 0.0;
    }
    let mut k_bits = k.log2();
    if k > 1.0 {
        k_bits += 2.0 * k_bits.log2();
    }
    THEORY_WEIGHT * (k_bits + subset_dl(total_conditions, k, k / total_conditions))
}

/// Bits to encode the exceptions of a rule set: `fp` false positives among
/// `cover` covered instances and `fn_` false negatives among `uncover`.
fn data_dl(exp_fp_over_err: f64, cover: f64, uncover: f64, fp: f64, fn_: f64) -> f64 {
    let total_bits = (cover + uncover + 1.0).log2();
    let (cover_bits, uncover_bits) = if cover > uncover {
        let exp_err = exp_fp_over_err * (fp + fn_);
        let cb = subset_dl(cover, fp, exp_err / cover);
        let ub = if uncover > 0.0 {
            subset_dl(uncover, fn_, fn_ / uncover)
        } else {
            0.0
        };
        (cb, ub)
    } else {
        let exp_err = (1.0 - exp_fp_over_err) * (fp + fn_);
        let cb = if cover > 0.0 {
            subset_dl(cover, fp, fp / cover)
        } else {
            0.0
        };
        let ub = subset_dl(uncover, fn_, exp_err / uncover);
        (cb, ub)
    };
    total_bits + cover_bits + uncover_bits
}

fn laplace(p: usize, n: usize) -> f64 {
    (p as f64 + 1.0) / ((p + n) as f64 + 2.0)
}

impl<'a> Learner<'a> {
    fn counts(&self, idx: &[usize], rule: &Rule) -> (usize, usize) {
        idx.iter()
            .filter(|&&i| rule.covers(&self.rows[i]))
            .fold((0, 0), |(p, n), &i| if self.pos[i] { (p + 1, n) } else { (p, n + 1) })
    }

    fn split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
        let (mut p, mut n): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.pos[i]);
        p.shuffle(rng);
        n.shuffle(rng);
        let cut = |len: usize| ((len as f64) * self.params.grow_fraction).ceil() as usize;
        let (pc, nc) = (cut(p.len()), cut(n.len()));
        let mut grow: Vec<usize> = p[..pc].iter().chain(&n[..nc]).copied().collect();
        let mut prune: Vec<usize> = p[pc..].iter().chain(&n[nc..]).copied().collect();
        grow.sort_unstable();
        prune.sort_unstable();
        (grow, prune)
    }

    /// Adds conditions greedily by FOIL gain until no negatives are covered.
    fn grow(&self, mut rule: Rule, grow: &[usize]) -> Rule {
        let mut covered: Vec<usize> = grow.iter().copied().filter(|&i| rule.covers(&self.rows[i])).collect();
        let d = self.rows.first().map_or(0, Vec::len);
        loop {
            let p0 = covered.iter().filter(|&&i| self.pos[i]).count();
            let n0 = covered.len() - p0;
            if n0 == 0 || p0 == 0 {
                break;
            }
            let base = (p0 as f64 / covered.len() as f64).log2();
            let mut best: Option<(f64, Condition)> = None;
            for f in 0..d {
                let mut vals: Vec<(f64, bool)> = covered.iter().map(|&i| (self.rows[i][f], self.pos[i])).collect();
                vals.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut lp = 0;
                for j in 0..vals.len() - 1 {
                    lp += usize::from(vals[j].1);
                    if vals[j].0 == vals[j + 1].0 {
                        continue;
                    }
                    let value = vals[j].0 + (vals[j + 1].0 - vals[j].0) / 2.0;
                    let ln = j + 1 - lp;
                    let sides = [(Op::Le, lp, ln), (Op::Gt, p0 - lp, n0 - ln)];
                    for (op, p1, n1) in sides {
                        if p1 == 0 || p1 + n1 < self.params.min_covered {
                            continue;
                        }
                        let gain = p1 as f64 * ((p1 as f64 / (p1 + n1) as f64).log2() - base);
                        if gain > 0.0 && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                            best = Some((gain, Condition { feature: f, op, value }));
                        }
                    }
                }
            }
            let Some((_, cond)) = best else { break };
            rule.conditions.push(cond);
            covered.retain(|&i| cond.holds(&self.rows[i]));
        }
        rule
    }

    /// Keeps the prefix of `rule` with the best Laplace accuracy on `prune`.
    fn prune_rule(&self, rule: Rule, prune: &[usize], keep: usize) -> Rule {
        if prune.is_empty() || rule.conditions.len() <= keep.max(1) {
            return rule;
        }
        let mut best_len = rule.conditions.len();
        let mut best_worth = f64::NEG_INFINITY;
        for len in keep.max(1)..=rule.conditions.len() {
            let (p, n) = self.counts(prune, &rule.prefix(len));
            let worth = laplace(p, n);
            if worth > best_worth {
                best_worth = worth;
                best_len = len;
            }
        }
        rule.prefix(best_len)
    }

    /// Prunes a candidate for slot `at` by the accuracy of the whole rule set
    /// on `prune`, which holds only instances not covered by earlier rules.
    fn prune_in_context(&self, rule: Rule, rules: &[Rule], at: usize, prune: &[usize]) -> Rule {
        if prune.is_empty() || rule.conditions.len() <= 1 {
            return rule;
        }
        let later = &rules[at + 1..];
        let mut best_len = rule.conditions.len();
        let mut best_acc = f64::NEG_INFINITY;
        for len in 1..=rule.conditions.len() {
            let cand = rule.prefix(len);
            let correct = prune
                .iter()
                .filter(|&&i| {
                    let x = &self.rows[i];
                    let fires = cand.covers(x) || later.iter().any(|r| r.covers(x));
                    fires == self.pos[i]
                })
                .count();
            let acc = correct as f64 / prune.len() as f64;
            if acc > best_acc {
                best_acc = acc;
                best_len = len;
            }
        }
        rule.prefix(best_len)
    }

    fn total_dl(&self, rules: &[Rule]) -> f64 {
        let theory: f64 = rules.iter().map(|r| theory_dl(r, self.total_conditions)).sum();
        let (mut cover, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for (x, &p) in self.rows.iter().zip(&self.pos) {
            let fired = rules.iter().any(|r| r.covers(x));
            if fired {
                cover += 1.0;
                if !p {
                    fp += 1.0;
                }
            } else if p {
                fn_ += 1.0;
            }
        }
        let uncover = self.rows.len() as f64 - cover;
        theory + data_dl(self.exp_fp_rate, cover, uncover, fp, fn_)
    }

    fn uncovered(&self, rules: &[Rule]) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| !rules.iter().any(|r| r.covers(&self.rows[i])))
            .collect()
    }

    /// Adds rules for the still-uncovered positives until the MDL budget or
    /// the error-rate check stops it.
    fn cover_remaining(&self, rules: &mut Vec<Rule>, rng: &mut ChaCha8Rng) {
        let mut min_dl = self.total_dl(rules);
        let mut remaining = self.uncovered(rules);
        while remaining.iter().any(|&i| self.pos[i]) {
            let (grow, prune) = self.split(&remaining, rng);
            let rule = self.grow(Rule::default(), &grow);
            let rule = self.prune_rule(rule, &prune, 1);
            if rule.conditions.is_empty() {
                break;
            }
            let (p, n) = self.counts(&remaining, &rule);
            if p == 0 || n as f64 / (p + n) as f64 >= 0.5 {
                break;
            }
            rules.push(rule);
            let dl = self.total_dl(rules);
            if dl > min_dl + MAX_DL_SURPLUS {
                break;
            }
            min_dl = min_dl.min(dl);
            let last = rules.last().unwrap();
            remaining.retain(|&i| !last.covers(&self.rows[i]));
        }
    }

    /// Drops rules, last first, whenever that shortens the total description.
    fn reduce_dl(&self, rules: &mut Vec<Rule>) {
        let mut i = rules.len();
        while i > 0 {
            i -= 1;
            let current = self.total_dl(rules);
            let mut without = rules.clone();
            without.remove(i);
            if self.total_dl(&without) < current {
                *rules = without;
            }
        }
    }

    fn optimize(&self, rules: &mut [Rule], rng: &mut ChaCha8Rng) {
        for at in 0..rules.len() {
            let data = self.uncovered(&rules[..at]);
            if data.is_empty() {
                continue;
            }
            let (grow, prune) = self.split(&data, rng);
            let replacement = self.grow(Rule::default(), &grow);
            let replacement = self.prune_in_context(replacement, rules, at, &prune);
            let revision = self.grow(rules[at].clone(), &grow);
            let revision = self.prune_in_context(revision, rules, at, &prune);

            let mut best = rules[at].clone();
            let mut best_dl = self.total_dl(rules);
            for cand in [replacement, revision] {
                if cand.conditions.is_empty() || cand == best {
                    continue;
                }
                let mut trial = rules.to_vec();
                trial[at] = cand.clone();
                let dl = self.total_dl(&trial);
                if dl < best_dl {
                    best_dl = dl;
                    best = cand;
                }
            }
            rules[at] = best;
        }
    }
}

impl Ripper {
    pub fn fit(rows: &[Vec<f64>], is_bot: &[bool], params: &RipperParams, seed: u64) -> Self {
        let bots = is_bot.iter().filter(|b| **b).count();
        let target_is_bot = bots * 2 <= is_bot.len();
        let pos: Vec<bool> = is_bot.iter().map(|&b| b == target_is_bot).collect();
        let d = rows.first().map_or(0, Vec::len);
        let total_conditions: f64 = (0..d)
            .map(|f| {
                let mut v: Vec<f64> = rows.iter().map(|r| r[f]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                2.0 * (v.len().saturating_sub(1)) as f64
            })
            .sum::<f64>()
            .max(1.0);
        let learner = Learner {
            rows,
            exp_fp_rate: pos.iter().filter(|p| **p).count() as f64 / rows.len() as f64,
            pos,
            params: *params,
            total_conditions,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut rules = Vec::new();
        learner.cover_remaining(&mut rules, &mut rng);
        learner.reduce_dl(&mut rules);
        for _ in 0..params.optimization_passes {
            learner.optimize(&mut rules, &mut rng);
            learner.cover_remaining(&mut rules, &mut rng);
            learner.reduce_dl(&mut rules);
        }

        let to_bot = |target_prob: f64| if target_is_bot { target_prob } else { 1.0 - target_prob };
        let mut remaining: Vec<usize> = (0..rows.len()).collect();
        let mut scored = Vec::with_capacity(rules.len());
        for rule in rules {
            let (p, n) = learner.counts(&remaining, &rule);
            remaining.retain(|&i| !rule.covers(&rows[i]));
            scored.push(ScoredRule {
                rule,
                bot_score: to_bot(laplace(p, n)),
            });
        }
        let p = remaining.iter().filter(|&&i| learner.pos[i]).count();
        Ripper {
            target_is_bot,
            rules: scored,
            default_bot_score: to_bot(laplace(p, remaining.len() - p)),
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.rules
            .iter()
            .find(|r| r.rule.covers(x))
            .map_or(self.default_bot_score, |r| r.bot_score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_dl_edges() {
        assert_eq!(subset_dl(10.0, 0.0, 0.0), 0.0);
        assert!((subset_dl(4.0, 2.0, 0.5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn theory_dl_single_condition() {
        // k=1 of 8: 0.5 * (0 + log2(8) + 7*log2(8/7))
        let rule = Rule {
            conditions: vec![Condition {
                feature: 0,
                op: Op::Le,
                value: 0.0,
            }],
        };
        let expected = 0.5 * (3.0 + 7.0 * (8.0f64 / 7.0).log2());
        assert!((theory_dl(&rule, 8.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn separates_threshold_data() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
        let is_bot: Vec<bool> = (0..60).map(|i| i >= 40).collect();
        let model = Ripper::fit(&rows, &is_bot, &RipperParams::default(), 5);
        assert!(model.target_is_bot);
        assert!(!model.rules.is_empty());
        for (r, b) in rows.iter().zip(&is_bot) {
            assert_eq!(model.score(r) >= 0.5, *b, "x={}", r[0]);
        }
    }

    #[test]
    fn learns_for_minority_when_humans_are_rare() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let is_bot: Vec<bool> = (0..60).map(|i| i >= 15).collect();
        let model = Ripper::fit(&rows, &is_bot, &RipperParams::default(), 5);
        assert!(!model.target_is_bot);
        let correct = rows
            .iter()
            .zip(&is_bot)
            .filter(|(r, b)| (model.score(r) >= 0.5) == **b)
            .count();
        assert_eq!(correct, 60);
    }

    #[test]
    fn noise_yields_graded_default() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 2) as f64]).collect();
        let is_bot: Vec<bool> = (0..40).map(|i| (i / 2) % 2 == 0).collect();
        let model = Ripper::fit(&rows, &is_bot, &RipperParams::default(), 1);
        let s = model.score(&[0.0]);
        assert!(s > 0.0 && s < 1.0);
    }
}
