use serde::{Deserialize, Serialize};

/// Relative variance floor, as a fraction of the feature's global variance.
const REL_VARIANCE_FLOOR: f64 = 1e-9;
const ABS_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassGaussians {
    log_prior: f64,
    means: Vec<f64>,
    variances: Vec<f64>,
}

impl ClassGaussians {
    fn log_likelihood(&self, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.means
            .iter()
            .zip(&self.variances)
            .zip(x)
            .map(|((m, v), xi)| -0.5 * (ln_2pi + v.ln() + (xi - m).powi(2) / v))
            .sum::<f64>()
            + self.log_prior
    }
}

/// Gaussian naive Bayes with per-class, per-feature normal densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    bot: ClassGaussians,
    human: ClassGaussians,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; 0 for a single value.
fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

fn class_model(rows: &[&Vec<f64>], floors: &[f64], prior: f64) -> ClassGaussians {
    let d = floors.len();
    let mut means = Vec::with_capacity(d);
    let mut variances = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        means.push(mean(&col));
        variances.push(sample_variance(&col).max(floors[j]));
    }
    ClassGaussians {
        log_prior: prior.ln(),
        means,
        variances,
    }
}

impl NaiveBayes {
    pub fn fit(rows: &[Vec<f64>], is_bot: &[bool]) -> Self {
        let n = rows.len() as f64;
        let d = rows[0].len();
        let floors: Vec<f64> = (0..d)
            .map(|j| {
                let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                let global = sample_variance(&col);
                if global > 0.0 {
                    global * REL_VARIANCE_FLOOR
                } else {
                    ABS_VARIANCE_FLOOR
                }
            })
            .collect();
        let (bots, humans): (Vec<_>, Vec<_>) = rows.iter().zip(is_bot).partition(|(_, b)| **b);
        let bots: Vec<&Vec<f64>> = bots.into_iter().map(|(r, _)| r).collect();
        let humans: Vec<&Vec<f64>> = humans.into_iter().map(|(r, _)| r).collect();
        NaiveBayes {
            bot: class_model(&bots, &floors, bots.len() as f64 / n),
            human: class_model(&humans, &floors, humans.len() as f64 / n),
        }
    }

    /// Posterior probability of the bot class.
    pub fn score(&self, x: &[f64]) -> f64 {
        let log_odds = self.bot.log_likelihood(x) - self.human.log_likelihood(x);
        if log_odds >= 0.0 {
            1.0 / (1.0 + (-log_odds).exp())
        } else {
            let e = log_odds.exp();
            e / (1.0 + e)
        }
    }

    pub fn class_means(&self) -> (&[f64], &[f64]) {
        (&self.bot.means, &self.human.means)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> NaiveBayes {
        let rows = vec![vec![0.8], vec![0.9], vec![0.1], vec![0.2]];
        NaiveBayes::fit(&rows, &[true, true, false, false])
    }

    #[test]
    fn class_means() {
        let nb = toy();
        let (b, h) = nb.class_means();
        assert!((b[0] - 0.85).abs() < 1e-12);
        assert!((h[0] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_likelihood_ratio() {
        // Both classes have sample variance 0.005 and equal priors, so at x=0.85
        // log-odds = ((0.85-0.15)^2 - 0) / (2 * 0.005) = 49.
        let nb = toy();
        let s = nb.score(&[0.85]);
        let expected = 1.0 / (1.0 + (-49.0f64).exp());
        assert!((s - expected).abs() < 1e-12, "{s}");
        assert!(s >= 0.5);
        assert!((nb.score(&[0.5]) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn constant_feature_does_not_blow_up() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0], vec![1.0, 6.0]];
        let nb = NaiveBayes::fit(&rows, &[false, false, true, true]);
        let s = nb.score(&[1.0, 5.5]);
        assert!(s.is_finite() && s > 0.5);
    }
}
