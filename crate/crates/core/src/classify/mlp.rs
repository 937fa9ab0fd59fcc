//! Feed-forward network: ReLU hidden layers, softmax output, cross-entropy
//! loss, Adam, and inverted dropout after every hidden layer.
//!
//! The first layer reads sparse rows directly, so the input matrix is never
//! densified.

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_labels, softmax_in_place, ClassifyError, ScoreModel};
use crate::sparse::SparseMatrix;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpOptions {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub dropout: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for MlpOptions {
    fn default() -> Self {
        MlpOptions {
            hidden: vec![100],
            lr: 0.001,
            dropout: 0.3,
            epochs: 5,
            batch: 256,
            seed: 42,
        }
    }
}

impl MlpOptions {
    /// One hidden layer of 100 units.
    pub fn preset_100() -> Self {
        Self::default()
    }

    /// Hidden layers of 100 and 50 units.
    pub fn preset_100_50() -> Self {
        MlpOptions {
            hidden: vec![100, 50],
            ..Self::default()
        }
    }
}

/// Fully connected layer; `weights` is row-major `n_in x n_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub dropout: f64,
    pub seed: u64,
}

/// Per-layer gradients, shaped like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

/// First and second moment estimates for every parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let zeros = model.zero_gradients();
        AdamState {
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

fn adam_update(param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], lr_t: f64) {
    for i in 0..param.len() {
        let g = grad[i];
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
        param[i] -= lr_t * m[i] / (v[i].sqrt() + ADAM_EPSILON);
    }
}

impl MlpModel {
    /// Glorot-uniform weights and zero biases. `sizes` lists the input
    /// width, the hidden widths, and the class count.
    pub fn init(sizes: &[usize], dropout: f64, seed: u64) -> Result<Self, ClassifyError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(ClassifyError::InvalidParameter(format!(
                "layer sizes must be positive, got {sizes:?}"
            )));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(ClassifyError::InvalidParameter(format!(
                "dropout must be in [0, 1), got {dropout}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit);
                Dense {
                    n_in,
                    n_out,
                    weights: (0..n_in * n_out).map(|_| dist.sample(&mut rng)).collect(),
                    bias: vec![0.0; n_out],
                }
            })
            .collect();
        Ok(MlpModel {
            layers,
            dropout,
            seed,
        })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].n_in];
        sizes.extend(self.layers.iter().map(|l| l.n_out));
        sizes
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self
                .layers
                .iter()
                .map(|l| vec![0.0; l.weights.len()])
                .collect(),
            bias: self
                .layers
                .iter()
                .map(|l| vec![0.0; l.bias.len()])
                .collect(),
        }
    }

    /// Activations of every layer for one row. `masks` holds the scaled
    /// dropout multipliers per hidden layer, or `None` at inference.
    fn forward(&self, x: &SparseMatrix, row: usize, masks: Option<&[Vec<f64>]>) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len());
        let first = &self.layers[0];
        let mut z = first.bias.clone();
        let (cols, vals) = x.row(row);
        for (&c, &v) in cols.iter().zip(vals) {
            let w = &first.weights[c * first.n_out..(c + 1) * first.n_out];
            for (zj, wj) in z.iter_mut().zip(w) {
                *zj += v * wj;
            }
        }
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            if li > 0 {
                let prev: &Vec<f64> = &acts[li - 1];
                z = layer.bias.clone();
                for (i, &a) in prev.iter().enumerate() {
                    if a != 0.0 {
                        let w = &layer.weights[i * layer.n_out..(i + 1) * layer.n_out];
                        for (zj, wj) in z.iter_mut().zip(w) {
                            *zj += a * wj;
                        }
                    }
                }
            }
            if li < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
                if let Some(masks) = masks {
                    for (v, m) in z.iter_mut().zip(&masks[li]) {
                        *v *= m;
                    }
                }
            } else {
                softmax_in_place(&mut z);
            }
            acts.push(z.clone());
        }
        acts
    }

    pub fn probabilities(&self, x: &SparseMatrix, row: usize) -> Vec<f64> {
        self.forward(x, row, None).pop().unwrap()
    }

    fn accumulate(
        &self,
        x: &SparseMatrix,
        row: usize,
        label: usize,
        masks: Option<&[Vec<f64>]>,
        scale: f64,
        grads: &mut Gradients,
    ) -> f64 {
        let acts = self.forward(x, row, masks);
        let last = self.layers.len() - 1;
        let probs = &acts[last];
        let loss = -probs[label].ln() * scale;
        let mut delta: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (p - f64::from(u8::from(k == label))) * scale)
            .collect();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            for (b, d) in grads.bias[li].iter_mut().zip(&delta) {
                *b += d;
            }
            if li == 0 {
                let (cols, vals) = x.row(row);
                for (&c, &v) in cols.iter().zip(vals) {
                    let g = &mut grads.weights[0][c * layer.n_out..(c + 1) * layer.n_out];
                    for (gj, dj) in g.iter_mut().zip(&delta) {
                        *gj += v * dj;
                    }
                }
                break;
            }
            let input = &acts[li - 1];
            let mut back = vec![0.0; layer.n_in];
            for (i, &a) in input.iter().enumerate() {
                let w = &layer.weights[i * layer.n_out..(i + 1) * layer.n_out];
                let g = &mut grads.weights[li][i * layer.n_out..(i + 1) * layer.n_out];
                let mut sum = 0.0;
                for j in 0..layer.n_out {
                    g[j] += a * delta[j];
                    sum += w[j] * delta[j];
                }
                // `a` already includes the dropout multiplier; a zero
                // activation means either ReLU was inactive or the unit was
                // dropped, and both block the gradient.
                back[i] = if a > 0.0 {
                    sum * masks.map_or(1.0, |m| m[li - 1][i])
                } else {
                    0.0
                };
            }
            delta = back;
        }
        loss
    }

    /// Mean cross-entropy over `rows` and its gradient, without dropout.
    pub fn loss_and_gradients(
        &self,
        x: &SparseMatrix,
        labels: &[usize],
        rows: &[usize],
    ) -> (f64, Gradients) {
        let mut grads = self.zero_gradients();
        let scale = 1.0 / rows.len() as f64;
        let loss = rows
            .iter()
            .map(|&r| self.accumulate(x, r, labels[r], None, scale, &mut grads))
            .sum();
        (loss, grads)
    }

    /// One Adam step on the mini-batch `rows` with dropout drawn from `rng`.
    /// Returns the batch loss before the update.
    pub fn train_step(
        &mut self,
        adam: &mut AdamState,
        x: &SparseMatrix,
        labels: &[usize],
        rows: &[usize],
        lr: f64,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let mut grads = self.zero_gradients();
        let scale = 1.0 / rows.len() as f64;
        let keep = 1.0 - self.dropout;
        let hidden = &self.layers[..self.layers.len() - 1];
        let mut loss = 0.0;
        for &r in rows {
            let masks: Option<Vec<Vec<f64>>> = (self.dropout > 0.0).then(|| {
                hidden
                    .iter()
                    .map(|l| {
                        (0..l.n_out)
                            .map(|_| {
                                if rng.gen::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    })
                    .collect()
            });
            loss += self.accumulate(x, r, labels[r], masks.as_deref(), scale, &mut grads);
        }
        adam.step += 1;
        let lr_t =
            lr * (1.0 - ADAM_BETA2.powi(adam.step)).sqrt() / (1.0 - ADAM_BETA1.powi(adam.step));
        for (li, layer) in self.layers.iter_mut().enumerate() {
            adam_update(
                &mut layer.weights,
                &grads.weights[li],
                &mut adam.m.weights[li],
                &mut adam.v.weights[li],
                lr_t,
            );
            adam_update(
                &mut layer.bias,
                &grads.bias[li],
                &mut adam.m.bias[li],
                &mut adam.v.bias[li],
                lr_t,
            );
        }
        loss
    }
}

impl ScoreModel for MlpModel {
    fn n_features(&self) -> usize {
        self.layers[0].n_in
    }

    fn n_classes(&self) -> usize {
        self.layers.last().unwrap().n_out
    }

    fn scores(&self, x: &SparseMatrix, row: usize) -> Vec<f64> {
        self.probabilities(x, row)
    }
}

pub fn train_mlp(
    x: &SparseMatrix,
    labels: &[usize],
    n_classes: usize,
    opts: &MlpOptions,
) -> Result<MlpModel, ClassifyError> {
    check_labels(x, labels, n_classes)?;
    if opts.batch == 0 || opts.lr.is_nan() || opts.lr <= 0.0 {
        return Err(ClassifyError::InvalidParameter(
            "learning rate and batch size must be positive".into(),
        ));
    }
    let mut sizes = vec![x.n_cols()];
    sizes.extend(&opts.hidden);
    sizes.push(n_classes);
    let mut model = MlpModel::init(&sizes, opts.dropout, opts.seed)?;
    let mut adam = AdamState::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    for epoch in 0..opts.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for batch in order.chunks(opts.batch) {
            loss += model.train_step(&mut adam, x, labels, batch, opts.lr, &mut rng)
                * batch.len() as f64;
        }
        log::debug!(
            "mlp epoch {}: mean loss {:.6}",
            epoch + 1,
            loss / x.n_rows() as f64
        );
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::predict;

    fn random_rows(rows: usize, cols: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        SparseMatrix::from_dense(cols, &dense)
    }

    fn max_relative_error(model: &MlpModel, x: &SparseMatrix, y: &[usize]) -> f64 {
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let (_, grads) = model.loss_and_gradients(x, y, &rows);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for li in 0..model.layers.len() {
            for which in 0..2 {
                let len = if which == 0 {
                    model.layers[li].weights.len()
                } else {
                    model.layers[li].bias.len()
                };
                for i in 0..len {
                    let mut plus = model.clone();
                    let mut minus = model.clone();
                    if which == 0 {
                        plus.layers[li].weights[i] += h;
                        minus.layers[li].weights[i] -= h;
                    } else {
                        plus.layers[li].bias[i] += h;
                        minus.layers[li].bias[i] -= h;
                    }
                    let numeric = (plus.loss_and_gradients(x, y, &rows).0
                        - minus.loss_and_gradients(x, y, &rows).0)
                        / (2.0 * h);
                    let analytic = if which == 0 {
                        grads.weights[li][i]
                    } else {
                        grads.bias[li][i]
                    };
                    let denom = analytic.abs().max(numeric.abs());
                    if denom > 1e-7 {
                        worst = worst.max((analytic - numeric).abs() / denom);
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = random_rows(6, 5, 1);
        let y = vec![0, 1, 2, 1, 0, 2];
        let mut model = MlpModel::init(&[5, 4, 3], 0.0, 7).unwrap();
        // Non-zero biases keep ReLUs away from their kink.
        for b in model.layers[0].bias.iter_mut() {
            *b = 0.3;
        }
        let err = max_relative_error(&model, &x, &y);
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn xor_is_learned() {
        let x = SparseMatrix::from_dense(
            2,
            &[
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
        );
        let y = vec![0, 1, 1, 0];
        let opts = MlpOptions {
            hidden: vec![8],
            lr: 0.05,
            dropout: 0.0,
            epochs: 500,
            batch: 4,
            seed: 3,
        };
        let m = train_mlp(&x, &y, 2, &opts).unwrap();
        assert_eq!(predict(&m, &x).unwrap(), y);
    }

    #[test]
    fn loss_decreases_over_first_adam_steps() {
        let x = random_rows(16, 6, 4);
        let y: Vec<usize> = (0..16).map(|i| i % 3).collect();
        let mut m = MlpModel::init(&[6, 10, 3], 0.0, 5).unwrap();
        let mut adam = AdamState::new(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows: Vec<usize> = (0..16).collect();
        let mut losses = Vec::new();
        for _ in 0..10 {
            losses.push(m.train_step(&mut adam, &x, &y, &rows, 1e-3, &mut rng));
        }
        losses.push(m.loss_and_gradients(&x, &y, &rows).0);
        for w in losses.windows(2) {
            assert!(w[1] < w[0], "{losses:?}");
        }
    }

    #[test]
    fn presets_and_defaults() {
        let d = MlpOptions::default();
        assert_eq!(d.lr, 0.001);
        assert_eq!(d.dropout, 0.3);
        assert_eq!(MlpOptions::preset_100().hidden, vec![100]);
        assert_eq!(MlpOptions::preset_100_50().hidden, vec![100, 50]);
    }

    #[test]
    fn invalid_configurations() {
        assert!(MlpModel::init(&[3, 0, 2], 0.0, 0).is_err());
        assert!(MlpModel::init(&[3, 2], 1.0, 0).is_err());
        let m = MlpModel::init(&[3, 4, 2], 0.3, 0).unwrap();
        assert_eq!(m.layer_sizes(), vec![3, 4, 2]);
        let wrong = random_rows(2, 5, 0);
        assert!(matches!(
            predict(&m, &wrong),
            Err(ClassifyError::FeatureMismatch { .. })
        ));
    }

    #[test]
    fn training_is_deterministic_and_normalized() {
        let x = random_rows(20, 4, 8);
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let opts = MlpOptions {
            hidden: vec![5],
            epochs: 3,
            batch: 4,
            ..Default::default()
        };
        let a = train_mlp(&x, &y, 2, &opts).unwrap();
        let b = train_mlp(&x, &y, 2, &opts).unwrap();
        assert_eq!(a, b);
        for r in 0..20 {
            let s: f64 = a.probabilities(&x, r).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }
}
