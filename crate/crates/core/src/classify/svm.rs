//! L2-regularized hinge-loss linear SVM trained by dual coordinate descent,
//! one-vs-rest for multiclass, with a cross-validated grid search over C.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{accuracy, check_labels, predict, ClassifyError, ScoreModel};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    /// Stop once the spread of projected gradients in an epoch is below this.
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmOptions {
    fn default() -> Self {
        SvmOptions {
            c: 1.0,
            tol: 1e-3,
            max_epochs: 1000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    /// One weight vector per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub c: f64,
}

impl ScoreModel for LinearSvmModel {
    fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn n_classes(&self) -> usize {
        self.weights.len()
    }

    fn scores(&self, x: &SparseMatrix, row: usize) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.row_dot(row, w) + b)
            .collect()
    }
}

/// Result of one binary problem.
#[derive(Debug, Clone)]
pub struct BinarySvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
    /// Dual objective `0.5 * |w|^2 - sum(alpha)` after each epoch, with the
    /// bias counted as a weight on a constant-1 feature.
    pub dual_objective: Vec<f64>,
}

/// Solves one binary problem with targets `y[i]` in {-1, +1}.
pub fn train_binary(x: &SparseMatrix, y: &[f64], opts: &SvmOptions) -> BinarySvm {
    let n = x.n_rows();
    let mut w = vec![0.0; x.n_cols()];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let qd: Vec<f64> = (0..n).map(|i| x.row_sq_norm(i) + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut history = Vec::new();
    let mut epochs = 0;

    while epochs < opts.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let g = y[i] * (x.row_dot(i, &w) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == opts.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, opts.c);
                let d = (alpha[i] - old) * y[i];
                let (cols, vals) = x.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    w[c] += d * v;
                }
                b += d;
            }
        }
        let norm: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        history.push(0.5 * norm - alpha.iter().sum::<f64>());
        if n == 0 || pg_max - pg_min < opts.tol {
            break;
        }
    }
    BinarySvm {
        weights: w,
        bias: b,
        epochs,
        dual_objective: history,
    }
}

/// One-vs-rest training over `n_classes` classes.
pub fn train_linear_svm(
    x: &SparseMatrix,
    labels: &[usize],
    n_classes: usize,
    opts: &SvmOptions,
) -> Result<LinearSvmModel, ClassifyError> {
    check_labels(x, labels, n_classes)?;
    if opts.c.is_nan() || opts.c <= 0.0 {
        return Err(ClassifyError::InvalidParameter(format!(
            "C must be positive, got {}",
            opts.c
        )));
    }
    let mut weights = Vec::with_capacity(n_classes);
    let mut bias = Vec::with_capacity(n_classes);
    for k in 0..n_classes {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == k { 1.0 } else { -1.0 })
            .collect();
        let class_opts = SvmOptions {
            seed: opts.seed.wrapping_add(k as u64),
            ..*opts
        };
        let m = train_binary(x, &y, &class_opts);
        weights.push(m.weights);
        bias.push(m.bias);
    }
    Ok(LinearSvmModel {
        weights,
        bias,
        c: opts.c,
    })
}

/// `steps` values of C spaced evenly in log2 from `2^min_exp` to `2^max_exp`.
pub fn c_grid(min_exp: f64, max_exp: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![2f64.powf(min_exp)],
        _ => (0..steps)
            .map(|k| 2f64.powf(min_exp + (max_exp - min_exp) * k as f64 / (steps - 1) as f64))
            .collect(),
    }
}

/// The default grid: ten values from 2^-5 to 2^5.
pub fn default_c_grid() -> Vec<f64> {
    c_grid(-5.0, 5.0, 10)
}

/// Assigns each sample a fold so that every class is spread evenly across
/// folds. Within a class the order is shuffled with `seed`.
pub fn stratified_folds(
    labels: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, ClassifyError> {
    if folds < 2 {
        return Err(ClassifyError::InvalidParameter(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if labels.len() < folds {
        return Err(ClassifyError::TooFewSamples {
            samples: labels.len(),
            folds,
        });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for k in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == k).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub grid: Vec<f64>,
    /// Mean cross-validation accuracy per grid value.
    pub scores: Vec<f64>,
    pub best_c: f64,
    /// Retrained on the full training data with `best_c`.
    pub model: LinearSvmModel,
}

/// Cross-validates every C in `grid` and retrains with the best one. Ties
/// go to the smaller C.
pub fn grid_search_c(
    x: &SparseMatrix,
    labels: &[usize],
    n_classes: usize,
    grid: &[f64],
    folds: usize,
    opts: &SvmOptions,
) -> Result<GridSearchResult, ClassifyError> {
    check_labels(x, labels, n_classes)?;
    if grid.is_empty() {
        return Err(ClassifyError::InvalidParameter("empty C grid".into()));
    }
    let assignment = stratified_folds(labels, folds, opts.seed)?;
    let splits: Vec<(SparseMatrix, Vec<usize>, SparseMatrix, Vec<usize>)> = (0..folds)
        .map(|f| {
            let train_rows: Vec<usize> =
                (0..labels.len()).filter(|&i| assignment[i] != f).collect();
            let held_rows: Vec<usize> = (0..labels.len()).filter(|&i| assignment[i] == f).collect();
            let pick = |rows: &[usize]| rows.iter().map(|&i| labels[i]).collect::<Vec<_>>();
            Ok((
                x.row_slice(&train_rows)?,
                pick(&train_rows),
                x.row_slice(&held_rows)?,
                pick(&held_rows),
            ))
        })
        .collect::<Result<_, ClassifyError>>()?;

    let mut scores = Vec::with_capacity(grid.len());
    for &c in grid {
        let fold_opts = SvmOptions { c, ..*opts };
        let mut total = 0.0;
        for (tx, ty, hx, hy) in &splits {
            let model = train_linear_svm(tx, ty, n_classes, &fold_opts)?;
            total += accuracy(&predict(&model, hx)?, hy)?;
        }
        scores.push(total / folds as f64);
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] || (s == scores[best] && grid[i] < grid[best]) {
            best = i;
        }
    }
    let best_c = grid[best];
    let model = train_linear_svm(x, labels, n_classes, &SvmOptions { c: best_c, ..*opts })?;
    Ok(GridSearchResult {
        grid: grid.to_vec(),
        scores,
        best_c,
        model,
    })
}
