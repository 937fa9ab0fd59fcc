//! Classifiers, their registry, and evaluation helpers.

pub mod logreg;
pub mod mlp;
pub mod supervised;
pub mod svm;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::args::Args;
use crate::sparse::{SparseError, SparseMatrix};

pub use logreg::{train_logreg, LogRegModel, LogRegOptions};
pub use mlp::{train_mlp, MlpModel, MlpOptions};
pub use supervised::{
    train_supervised_embedding, SupervisedEmbeddingModel, SupervisedEmbeddingOptions,
};
pub use svm::{
    c_grid, default_c_grid, grid_search_c, train_linear_svm, GridSearchResult, LinearSvmModel,
    SvmOptions,
};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("empty training data")]
    EmptyTrainingData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{samples} samples cannot be split into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("model expects {expected} features, input has {found}")]
    FeatureMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("classifier needs token streams that were not supplied")]
    MissingTokens,
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

/// A trained model that scores each class for one sparse row.
pub trait ScoreModel {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;
    fn scores(&self, x: &SparseMatrix, row: usize) -> Vec<f64>;
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict<M: ScoreModel>(model: &M, x: &SparseMatrix) -> Result<Vec<usize>, ClassifyError> {
    if x.n_cols() != model.n_features() {
        return Err(ClassifyError::FeatureMismatch {
            expected: model.n_features(),
            found: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .map(|r| argmax(&model.scores(x, r)))
        .collect())
}

/// Fraction of exact matches. Empty input scores 0.
pub fn accuracy(predicted: &[usize], gold: &[usize]) -> Result<f64, ClassifyError> {
    if predicted.len() != gold.len() {
        return Err(ClassifyError::LengthMismatch {
            left: predicted.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Ok(0.0);
    }
    let hits = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gold.len() as f64)
}

pub(crate) fn check_labels(
    x: &SparseMatrix,
    labels: &[usize],
    n_classes: usize,
) -> Result<(), ClassifyError> {
    if x.n_rows() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            left: x.n_rows(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(ClassifyError::EmptyTrainingData);
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(ClassifyError::LabelOutOfRange { label, n_classes });
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(ClassifyError::SingleClass);
    }
    Ok(())
}

/// Numerically stable softmax.
pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TrainReport {
    pub classifier: String,
    /// Hyperparameters actually used, including any chosen by search.
    pub params: BTreeMap<String, String>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub wall_seconds: f64,
}

/// Everything a registered classifier may train and evaluate on.
pub struct ClassifierData<'a> {
    pub train: &'a SparseMatrix,
    pub test: &'a SparseMatrix,
    pub train_labels: &'a [usize],
    pub test_labels: &'a [usize],
    pub n_classes: usize,
    pub train_tokens: Option<&'a [Vec<String>]>,
    pub test_tokens: Option<&'a [Vec<String>]>,
}

pub type RunFn = fn(&ClassifierData, &mut Args, u64) -> Result<Evaluation, ClassifyError>;

/// Predictions of a trained classifier plus the parameters it used.
pub struct Evaluation {
    pub params: BTreeMap<String, String>,
    pub train_predictions: Vec<usize>,
    pub test_predictions: Vec<usize>,
}

pub struct ClassifierEntry {
    pub name: &'static str,
    pub usage: &'static str,
    /// Whether the classifier reads token streams instead of the matrices.
    pub needs_tokens: bool,
    pub run: RunFn,
}

inventory::collect!(ClassifierEntry);

/// Registered classifiers sorted by name.
pub fn registry() -> Vec<&'static ClassifierEntry> {
    let mut entries: Vec<&'static ClassifierEntry> =
        inventory::iter::<ClassifierEntry>.into_iter().collect();
    entries.sort_by_key(|e| e.name);
    entries
}

pub fn find(name: &str) -> Option<&'static ClassifierEntry> {
    inventory::iter::<ClassifierEntry>
        .into_iter()
        .find(|e| e.name == name)
}

/// Trains the named classifier with `params`, evaluates it on both splits
/// and times the whole call.
pub fn train_and_evaluate(
    name: &str,
    params: &BTreeMap<String, String>,
    data: &ClassifierData,
    seed: u64,
) -> Result<TrainReport, ClassifyError> {
    let entry = find(name)
        .ok_or_else(|| ClassifyError::InvalidParameter(format!("unknown classifier `{name}`")))?;
    let start = Instant::now();
    let mut args = Args::from_map(params.clone());
    let seed = args
        .get("seed")
        .map_err(ClassifyError::InvalidParameter)?
        .unwrap_or(seed);
    let eval = (entry.run)(data, &mut args, seed)?;
    args.finish().map_err(ClassifyError::InvalidParameter)?;
    Ok(TrainReport {
        classifier: name.to_string(),
        params: eval.params,
        train_accuracy: accuracy(&eval.train_predictions, data.train_labels)?,
        test_accuracy: accuracy(&eval.test_predictions, data.test_labels)?,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn param<T: std::str::FromStr>(args: &mut Args, key: &str, default: T) -> Result<T, ClassifyError> {
    args.get_or(key, default)
        .map_err(ClassifyError::InvalidParameter)
}

fn run_svm(data: &ClassifierData, args: &mut Args, seed: u64) -> Result<Evaluation, ClassifyError> {
    let defaults = SvmOptions::default();
    let mut opts = SvmOptions {
        tol: param(args, "tol", defaults.tol)?,
        max_epochs: param(args, "max_epochs", defaults.max_epochs)?,
        seed,
        ..defaults
    };
    let mut params = BTreeMap::new();
    let fixed_c: Option<f64> = args.get("c").map_err(ClassifyError::InvalidParameter)?;
    let c_min = param(args, "c_min_exp", -5.0)?;
    let c_max = param(args, "c_max_exp", 5.0)?;
    let c_steps = param(args, "c_steps", 10usize)?;
    let folds = param(args, "folds", 3usize)?;
    let model = match fixed_c {
        Some(c) => {
            opts.c = c;
            train_linear_svm(data.train, data.train_labels, data.n_classes, &opts)?
        }
        None => {
            let grid = c_grid(c_min, c_max, c_steps);
            let result = grid_search_c(
                data.train,
                data.train_labels,
                data.n_classes,
                &grid,
                folds,
                &opts,
            )?;
            let scores: Vec<String> = result
                .grid
                .iter()
                .zip(&result.scores)
                .map(|(c, s)| format!("{c}:{s}"))
                .collect();
            params.insert("folds".into(), folds.to_string());
            params.insert("cv_scores".into(), scores.join(" "));
            result.model
        }
    };
    params.insert("c".into(), model.c.to_string());
    params.insert("tol".into(), opts.tol.to_string());
    params.insert("max_epochs".into(), opts.max_epochs.to_string());
    params.insert("seed".into(), seed.to_string());
    Ok(Evaluation {
        params,
        train_predictions: predict(&model, data.train)?,
        test_predictions: predict(&model, data.test)?,
    })
}

fn run_logreg(
    data: &ClassifierData,
    args: &mut Args,
    seed: u64,
) -> Result<Evaluation, ClassifyError> {
    let d = LogRegOptions::default();
    let opts = LogRegOptions {
        lr: param(args, "lr", d.lr)?,
        epochs: param(args, "epochs", d.epochs)?,
        batch: param(args, "batch", d.batch)?,
        seed,
    };
    let model = train_logreg(data.train, data.train_labels, data.n_classes, &opts)?;
    let params = BTreeMap::from([
        ("lr".into(), opts.lr.to_string()),
        ("epochs".into(), opts.epochs.to_string()),
        ("batch".into(), opts.batch.to_string()),
        ("seed".into(), seed.to_string()),
    ]);
    Ok(Evaluation {
        params,
        train_predictions: predict(&model, data.train)?,
        test_predictions: predict(&model, data.test)?,
    })
}

fn run_mlp(data: &ClassifierData, args: &mut Args, seed: u64) -> Result<Evaluation, ClassifyError> {
    let d = MlpOptions::default();
    let opts = MlpOptions {
        hidden: args
            .list("hidden")
            .map_err(ClassifyError::InvalidParameter)?
            .unwrap_or(d.hidden),
        lr: param(args, "lr", d.lr)?,
        dropout: param(args, "dropout", d.dropout)?,
        epochs: param(args, "epochs", d.epochs)?,
        batch: param(args, "batch", d.batch)?,
        seed,
    };
    let model = train_mlp(data.train, data.train_labels, data.n_classes, &opts)?;
    let hidden: Vec<String> = opts.hidden.iter().map(usize::to_string).collect();
    let params = BTreeMap::from([
        ("hidden".into(), hidden.join(",")),
        ("lr".into(), opts.lr.to_string()),
        ("dropout".into(), opts.dropout.to_string()),
        ("epochs".into(), opts.epochs.to_string()),
        ("batch".into(), opts.batch.to_string()),
        ("seed".into(), seed.to_string()),
    ]);
    Ok(Evaluation {
        params,
        train_predictions: predict(&model, data.train)?,
        test_predictions: predict(&model, data.test)?,
    })
}

pub(crate) fn supervised_options(
    args: &mut Args,
    seed: u64,
) -> Result<SupervisedEmbeddingOptions, String> {
    let d = SupervisedEmbeddingOptions::default();
    Ok(SupervisedEmbeddingOptions {
        dim: args.get_or("dim", d.dim)?,
        epochs: args.get_or("epochs", d.epochs)?,
        lr: args.get_or("lr", d.lr)?,
        buckets: args.get_or("buckets", d.buckets)?,
        seed,
    })
}

fn run_supervised(
    data: &ClassifierData,
    args: &mut Args,
    seed: u64,
) -> Result<Evaluation, ClassifyError> {
    let (Some(train), Some(test)) = (data.train_tokens, data.test_tokens) else {
        return Err(ClassifyError::MissingTokens);
    };
    let opts = supervised_options(args, seed).map_err(ClassifyError::InvalidParameter)?;
    let model = train_supervised_embedding(train, data.train_labels, data.n_classes, &opts)?;
    let params = BTreeMap::from([
        ("dim".into(), opts.dim.to_string()),
        ("epochs".into(), opts.epochs.to_string()),
        ("lr".into(), opts.lr.to_string()),
        ("buckets".into(), opts.buckets.to_string()),
        ("seed".into(), seed.to_string()),
    ]);
    Ok(Evaluation {
        params,
        train_predictions: model.predict(train),
        test_predictions: model.predict(test),
    })
}

inventory::submit! {
    ClassifierEntry {
        name: "svm",
        usage: "c=<fixed C, skips search> c_min_exp=-5 c_max_exp=5 c_steps=10 folds=3 tol=0.001 max_epochs=1000 seed=<run seed>",
        needs_tokens: false,
        run: run_svm,
    }
}

inventory::submit! {
    ClassifierEntry {
        name: "logreg",
        usage: "lr=0.5 epochs=10 batch=32 seed=<run seed>",
        needs_tokens: false,
        run: run_logreg,
    }
}

inventory::submit! {
    ClassifierEntry {
        name: "mlp",
        usage: "hidden=100 (or 100,50) lr=0.001 dropout=0.3 epochs=5 batch=256 seed=<run seed>",
        needs_tokens: false,
        run: run_mlp,
    }
}

inventory::submit! {
    ClassifierEntry {
        name: "supervised-embedding",
        usage: "dim=10 epochs=5 lr=0.1 buckets=1000000 seed=<run seed>",
        needs_tokens: true,
        run: run_supervised,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Fixed(Vec<f64>);

    impl ScoreModel for Fixed {
        fn n_features(&self) -> usize {
            1
        }
        fn n_classes(&self) -> usize {
            self.0.len()
        }
        fn scores(&self, _: &SparseMatrix, _: usize) -> Vec<f64> {
            self.0.clone()
        }
    }

    #[test]
    fn ties_go_to_lowest_class() {
        let x = SparseMatrix::from_dense(1, &[vec![1.0], vec![0.0]]);
        assert_eq!(predict(&Fixed(vec![0.0; 3]), &x).unwrap(), vec![0, 0]);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn empty_batch_and_feature_mismatch() {
        let empty = SparseMatrix::zeros(0, 1);
        assert!(predict(&Fixed(vec![1.0]), &empty).unwrap().is_empty());
        let wide = SparseMatrix::zeros(1, 4);
        assert!(matches!(
            predict(&Fixed(vec![1.0]), &wide),
            Err(ClassifyError::FeatureMismatch {
                expected: 1,
                found: 4
            })
        ));
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[0, 1], &[0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn registry_lists_all_classifiers() {
        let names: Vec<&str> = registry().iter().map(|e| e.name).collect();
        assert_eq!(names, ["logreg", "mlp", "supervised-embedding", "svm"]);
    }

    #[test]
    fn unknown_params_are_rejected() {
        let x = SparseMatrix::from_dense(1, &[vec![1.0], vec![-1.0]]);
        let y = [0, 1];
        let data = ClassifierData {
            train: &x,
            test: &x,
            train_labels: &y,
            test_labels: &y,
            n_classes: 2,
            train_tokens: None,
            test_tokens: None,
        };
        let ok = BTreeMap::from([("c".to_string(), "1".to_string())]);
        let report = train_and_evaluate("svm", &ok, &data, 1).unwrap();
        assert_eq!(report.test_accuracy, 1.0);
        let bad = BTreeMap::from([("gamma".to_string(), "1".to_string())]);
        assert!(train_and_evaluate("svm", &bad, &data, 1).is_err());
        assert!(matches!(
            train_and_evaluate("supervised-embedding", &BTreeMap::new(), &data, 1),
            Err(ClassifyError::MissingTokens)
        ));
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(v in proptest::collection::vec(-50.0f64..50.0, 1..10)) {
            let mut s = v.clone();
            softmax_in_place(&mut s);
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn positive_scaling_keeps_argmax(v in proptest::collection::vec(-5.0f64..5.0, 1..10), k in 0.01f64..100.0) {
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            prop_assert_eq!(argmax(&v), argmax(&scaled));
        }
    }
}
