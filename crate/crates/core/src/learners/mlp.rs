use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// Hidden units; `None` means `ceil((d + 2) / 2)`.
    pub hidden: Option<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub init_range: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: None,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            init_range: 0.5,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One-hidden-layer perceptron with sigmoid units trained by online
/// backpropagation with momentum on squared error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    mins: Vec<f64>,
    ranges: Vec<f64>,
    /// `hidden x (d + 1)`, bias last.
    hidden_weights: Vec<Vec<f64>>,
    /// `hidden + 1`, bias last.
    output_weights: Vec<f64>,
}

impl Mlp {
    pub fn default_hidden(d: usize) -> usize {
        (d + 2).div_ceil(2)
    }

    pub fn fit(rows: &[Vec<f64>], is_bot: &[bool], params: &MlpParams, seed: u64) -> Self {
        let d = rows[0].len();
        let h = params.hidden.unwrap_or_else(|| Self::default_hidden(d)).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = params.init_range;

        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for row in rows {
            for j in 0..d {
                mins[j] = mins[j].min(row[j]);
                maxs[j] = maxs[j].max(row[j]);
            }
        }
        let ranges = mins.iter().zip(&maxs).map(|(lo, hi)| hi - lo).collect();
        let mut net = Mlp {
            mins,
            ranges,
            hidden_weights: (0..h)
                .map(|_| (0..=d).map(|_| rng.gen_range(-r..=r)).collect())
                .collect(),
            output_weights: (0..=h).map(|_| rng.gen_range(-r..=r)).collect(),
        };

        let inputs: Vec<Vec<f64>> = rows.iter().map(|x| net.normalize(x)).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut rng);

        let mut prev_hidden = vec![vec![0.0; d + 1]; h];
        let mut prev_output = vec![0.0; h + 1];
        let mut hidden_out = vec![0.0; h];
        let mut hidden_delta = vec![0.0; h];
        for _ in 0..params.epochs {
            for &i in &order {
                let x = &inputs[i];
                let target = if is_bot[i] { 1.0 } else { 0.0 };
                let out = net.forward(x, &mut hidden_out);
                let out_delta = (target - out) * out * (1.0 - out);
                for k in 0..h {
                    hidden_delta[k] = out_delta * net.output_weights[k] * hidden_out[k] * (1.0 - hidden_out[k]);
                }
                for k in 0..=h {
                    let input = if k < h { hidden_out[k] } else { 1.0 };
                    let step = params.learning_rate * out_delta * input + params.momentum * prev_output[k];
                    net.output_weights[k] += step;
                    prev_output[k] = step;
                }
                for k in 0..h {
                    for j in 0..=d {
                        let input = if j < d { x[j] } else { 1.0 };
                        let step = params.learning_rate * hidden_delta[k] * input + params.momentum * prev_hidden[k][j];
                        net.hidden_weights[k][j] += step;
                        prev_hidden[k][j] = step;
                    }
                }
            }
        }
        net
    }

    /// Maps training ranges to [-1, 1]; constant columns map to 0.
    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mins.iter().zip(&self.ranges))
            .map(|(v, (lo, range))| {
                if *range > 0.0 {
                    2.0 * (v - lo) / range - 1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn forward(&self, x: &[f64], hidden_out: &mut [f64]) -> f64 {
        let d = x.len();
        for (k, w) in self.hidden_weights.iter().enumerate() {
            let z = w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d];
            hidden_out[k] = sigmoid(z);
        }
        let h = hidden_out.len();
        let z = self.output_weights[..h]
            .iter()
            .zip(hidden_out.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + self.output_weights[h];
        sigmoid(z)
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden_weights.len()];
        self.forward(&self.normalize(x), &mut hidden)
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden_weights.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hidden_layer_width() {
        assert_eq!(Mlp::default_hidden(1), 2);
        assert_eq!(Mlp::default_hidden(4), 3);
        assert_eq!(Mlp::default_hidden(15), 9);
    }

    #[test]
    fn learns_a_threshold() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let is_bot: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let net = Mlp::fit(&rows, &is_bot, &MlpParams::default(), 3);
        for (r, b) in rows.iter().zip(&is_bot) {
            assert_eq!(net.score(r) >= 0.5, *b, "x={}", r[0]);
        }
    }

    #[test]
    fn learns_xor() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let is_bot = [false, true, true, false];
        let params = MlpParams {
            hidden: Some(4),
            epochs: 5000,
            ..MlpParams::default()
        };
        let net = Mlp::fit(&rows, &is_bot, &params, 11);
        for (r, b) in rows.iter().zip(is_bot) {
            assert_eq!(net.score(r) >= 0.5, b);
        }
    }
}
