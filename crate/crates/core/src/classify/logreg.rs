//! Multinomial logistic regression trained by mini-batch gradient descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_labels, softmax_in_place, ClassifyError, ScoreModel};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegOptions {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        LogRegOptions {
            lr: 0.5,
            epochs: 10,
            batch: 32,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    /// Row-major `n_classes x n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub n_features: usize,
}

impl ScoreModel for LogRegModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.bias.len()
    }

    fn scores(&self, x: &SparseMatrix, row: usize) -> Vec<f64> {
        self.bias
            .iter()
            .enumerate()
            .map(|(k, b)| {
                x.row_dot(
                    row,
                    &self.weights[k * self.n_features..(k + 1) * self.n_features],
                ) + b
            })
            .collect()
    }
}

impl LogRegModel {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        LogRegModel {
            weights: vec![0.0; n_features * n_classes],
            bias: vec![0.0; n_classes],
            n_features,
        }
    }

    pub fn probabilities(&self, x: &SparseMatrix, row: usize) -> Vec<f64> {
        let mut s = self.scores(x, row);
        softmax_in_place(&mut s);
        s
    }

    /// Mean cross-entropy over `rows` and its gradient with respect to
    /// `(weights, bias)`.
    pub fn loss_and_gradient(
        &self,
        x: &SparseMatrix,
        labels: &[usize],
        rows: &[usize],
    ) -> (f64, Vec<f64>, Vec<f64>) {
        let mut gw = vec![0.0; self.weights.len()];
        let mut gb = vec![0.0; self.bias.len()];
        let scale = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &r in rows {
            let p = self.probabilities(x, r);
            loss -= p[labels[r]].ln() * scale;
            let (cols, vals) = x.row(r);
            for (k, &pk) in p.iter().enumerate() {
                let delta = (pk - f64::from(u8::from(k == labels[r]))) * scale;
                gb[k] += delta;
                for (&c, &v) in cols.iter().zip(vals) {
                    gw[k * self.n_features + c] += delta * v;
                }
            }
        }
        (loss, gw, gb)
    }
}

pub fn train_logreg(
    x: &SparseMatrix,
    labels: &[usize],
    n_classes: usize,
    opts: &LogRegOptions,
) -> Result<LogRegModel, ClassifyError> {
    check_labels(x, labels, n_classes)?;
    if opts.lr.is_nan() || opts.lr <= 0.0 || opts.batch == 0 {
        return Err(ClassifyError::InvalidParameter(
            "learning rate and batch size must be positive".into(),
        ));
    }
    let mut model = LogRegModel::zeros(x.n_cols(), n_classes);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(opts.batch) {
            let scale = opts.lr / batch.len() as f64;
            let probs: Vec<Vec<f64>> = batch.iter().map(|&r| model.probabilities(x, r)).collect();
            for (&r, p) in batch.iter().zip(&probs) {
                let (cols, vals) = x.row(r);
                for (k, &pk) in p.iter().enumerate() {
                    let delta = (pk - f64::from(u8::from(k == labels[r]))) * scale;
                    model.bias[k] -= delta;
                    let w = &mut model.weights[k * model.n_features..(k + 1) * model.n_features];
                    for (&c, &v) in cols.iter().zip(vals) {
                        w[c] -= delta * v;
                    }
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::predict;
    use rand::Rng;

    fn random_problem(seed: u64) -> (SparseMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let labels = (0..8).map(|i| i % 3).collect();
        (SparseMatrix::from_dense(5, &rows), labels)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = random_problem(11);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut m = LogRegModel::zeros(5, 3);
        for w in m.weights.iter_mut().chain(m.bias.iter_mut()) {
            *w = rng.gen_range(-0.5..0.5);
        }
        let rows: Vec<usize> = (0..8).collect();
        let (_, gw, gb) = m.loss_and_gradient(&x, &y, &rows);
        let h = 1e-5;
        let analytic: Vec<f64> = gw.iter().chain(&gb).copied().collect();
        for (i, &a) in analytic.iter().enumerate() {
            let mut plus = m.clone();
            let mut minus = m.clone();
            let nw = m.weights.len();
            let (pp, mm) = if i < nw {
                (&mut plus.weights[i], &mut minus.weights[i])
            } else {
                (&mut plus.bias[i - nw], &mut minus.bias[i - nw])
            };
            *pp += h;
            *mm -= h;
            let numeric = (plus.loss_and_gradient(&x, &y, &rows).0
                - minus.loss_and_gradient(&x, &y, &rows).0)
                / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "param {i}: {a} vs {numeric}");
        }
    }

    #[test]
    fn separable_toy_fits() {
        let x = SparseMatrix::from_dense(
            2,
            &[
                vec![1.0, 0.0],
                vec![0.9, 0.1],
                vec![0.0, 1.0],
                vec![0.1, 0.8],
            ],
        );
        let y = vec![0, 0, 1, 1];
        let m = train_logreg(
            &x,
            &y,
            2,
            &LogRegOptions {
                epochs: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(predict(&m, &x).unwrap(), y);
        let p = m.probabilities(&x, 0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_rejected() {
        let x = SparseMatrix::from_dense(1, &[vec![1.0]]);
        assert!(train_logreg(&x, &[0], 2, &LogRegOptions::default()).is_err());
    }
}
