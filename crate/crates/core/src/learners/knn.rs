use serde::{Deserialize, Serialize};

/// Instance-based learner: Euclidean distance over min-max normalized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    mins: Vec<f64>,
    ranges: Vec<f64>,
    /// Normalized training rows, in training order.
    points: Vec<Vec<f64>>,
    is_bot: Vec<bool>,
}

impl Knn {
    pub fn fit(rows: &[Vec<f64>], is_bot: &[bool], k: usize) -> Self {
        let d = rows[0].len();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for j in 0..d {
                mins[j] = mins[j].min(r[j]);
                maxs[j] = maxs[j].max(r[j]);
            }
        }
        let ranges: Vec<f64> = mins.iter().zip(&maxs).map(|(lo, hi)| hi - lo).collect();
        let mut model = Knn {
            k,
            mins,
            ranges,
            points: Vec::new(),
            is_bot: is_bot.to_vec(),
        };
        model.points = rows.iter().map(|r| model.normalize(r)).collect();
        model
    }

    /// Constant training columns map to 0.
    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mins.iter().zip(&self.ranges))
            .map(|(v, (lo, range))| if *range > 0.0 { (v - lo) / range } else { 0.0 })
            .collect()
    }

    pub fn training_rows(&self) -> usize {
        self.points.len()
    }

    /// Fraction of the k nearest training points that are bots. Equidistant
    /// neighbors are taken in training-row order.
    pub fn score(&self, x: &[f64]) -> f64 {
        let q = self.normalize(x);
        let mut dists: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum();
                (d2, i)
            })
            .collect();
        let k = self.k.min(dists.len());
        dists.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let bots = dists[..k].iter().filter(|(_, i)| self.is_bot[*i]).count();
        bots as f64 / k as f64
    }
}
