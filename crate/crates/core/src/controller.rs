//! End-to-end runs driven by a config file, and the registry listings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{self, ClassifierData, ClassifyError, TrainReport};
use crate::config::{load_config, validate_paths, ConfigError, LogLevel, RunConfig};
use crate::dataset::{Dataset, DatasetError};
use crate::export::{export, ExportError, ExportJob};
use crate::features::{self, extract_all, thread_pool, FeatureError, FeatureTiming};
use crate::preprocess::{fulfill, PreprocessError, PreprocessRequest};

/// Environment variable that overrides `[settings] threads`.
pub const THREADS_ENV: &str = "FEATFORGE_THREADS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("config error: {0}")]
    Threads(String),
    #[error("data error: {0}")]
    MissingInputs(String),
    #[error("data error: {0}")]
    Data(#[from] DatasetError),
    #[error("extraction error: {0}")]
    Extraction(#[from] FeatureError),
    #[error("export error: {0}")]
    Export(#[from] ExportError),
    #[error("cannot write report {path}: {source}")]
    Report {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("training error in {classifier}: {source}")]
    Training {
        classifier: String,
        source: ClassifyError,
    },
}

impl RunError {
    /// Process exit status: 2 config, 3 data or output, 4 extraction,
    /// 5 training.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Threads(_) => 2,
            RunError::MissingInputs(_)
            | RunError::Data(_)
            | RunError::Export(_)
            | RunError::Report { .. } => 3,
            RunError::Extraction(FeatureError::Preprocess(
                PreprocessError::Io { .. }
                | PreprocessError::TaggedCorpus { .. }
                | PreprocessError::EmptyTaggedCorpus
                | PreprocessError::Embeddings { .. },
            )) => 3,
            RunError::Extraction(_) => 4,
            RunError::Training { .. } => 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BlockShape {
    pub train: (usize, usize),
    pub test: (usize, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    /// The effective configuration in INI form.
    pub config: String,
    pub threads: usize,
    pub preprocess_seconds: f64,
    pub features: Vec<FeatureTiming>,
    pub merged: BlockShape,
    pub exports: Vec<PathBuf>,
    pub classifiers: Vec<TrainReport>,
    pub total_seconds: f64,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "featforge run report");
        let _ = writeln!(s, "threads: {}", self.threads);
        let _ = writeln!(s, "preprocessing: {:.3}s", self.preprocess_seconds);
        let _ = writeln!(s, "\nfeatures:");
        let _ = writeln!(
            s,
            "  {:>3}  {:<22} {:>12} {:>12} {:>9}  args",
            "id", "name", "train", "test", "seconds"
        );
        for f in &self.features {
            let _ = writeln!(
                s,
                "  {:>3}  {:<22} {:>12} {:>12} {:>9.3}  {}",
                f.feature_id,
                f.name,
                format!("{}x{}", f.train_shape.0, f.train_shape.1),
                format!("{}x{}", f.test_shape.0, f.test_shape.1),
                f.seconds,
                f.args
            );
        }
        let _ = writeln!(
            s,
            "merged: train {}x{}, test {}x{}",
            self.merged.train.0, self.merged.train.1, self.merged.test.0, self.merged.test.1
        );
        if !self.exports.is_empty() {
            let _ = writeln!(s, "\nexports:");
            for p in &self.exports {
                let _ = writeln!(s, "  {}", p.display());
            }
        }
        let _ = writeln!(s, "\nclassifiers:");
        if self.classifiers.is_empty() {
            let _ = writeln!(s, "  (none)");
        }
        for c in &self.classifiers {
            let _ = writeln!(
                s,
                "  {:<22} train {:>7.2}%  test {:>7.2}%  {:>9.3}s",
                c.classifier,
                100.0 * c.train_accuracy,
                100.0 * c.test_accuracy,
                c.wall_seconds
            );
            for (k, v) in &c.params {
                let _ = writeln!(s, "      {k} = {v}");
            }
        }
        let _ = writeln!(s, "\ntotal: {:.3}s", self.total_seconds);
        s
    }
}

/// Applies a thread-count override such as the value of [`THREADS_ENV`].
pub fn apply_threads_override(cfg: &mut RunConfig, value: Option<&str>) -> Result<(), RunError> {
    if let Some(v) = value {
        let threads: usize = v.trim().parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
            RunError::Threads(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        cfg.settings.threads = threads;
    }
    Ok(())
}

/// Installs the stderr logger at `level`; later calls are ignored.
pub fn init_logging(level: LogLevel) {
    let _ = env_logger::Builder::new()
        .filter_level(level.to_filter())
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Loads the config at `path` (relative paths resolve against its
/// directory), applies [`THREADS_ENV`], and runs it.
pub fn run(path: &Path) -> Result<RunReport, RunError> {
    let mut cfg = load_config(path)?;
    if let Some(dir) = path.parent() {
        cfg.resolve_relative_to(dir);
    }
    apply_threads_override(&mut cfg, std::env::var(THREADS_ENV).ok().as_deref())?;
    init_logging(cfg.settings.log_level);
    run_config(&cfg)
}

/// Runs an already parsed config: load, extract, export, train, report.
pub fn run_config(cfg: &RunConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    features::checked_registry()?;
    if let Err(missing) = validate_paths(cfg) {
        let list: Vec<String> = missing.iter().map(ToString::to_string).collect();
        return Err(RunError::MissingInputs(list.join("; ")));
    }
    let i = &cfg.input;
    let data = Dataset::load(&i.train_text, &i.train_labels, &i.test_text, &i.test_labels)?;
    log::info!(
        "loaded {} train and {} test sentences, {} classes",
        data.train_sentences.len(),
        data.test_sentences.len(),
        data.n_classes()
    );

    let extraction = extract_all(cfg, &data)?;
    let block = &extraction.block;
    log::info!("merged feature block has {} columns", block.n_cols());

    let exports = if cfg.output.formats.is_empty() {
        Vec::new()
    } else {
        export(&ExportJob {
            block,
            train_labels: &data.train_labels,
            test_labels: &data.test_labels,
            label_names: &data.label_names,
            formats: &cfg.output.formats,
            directory: &cfg.output.directory,
        })?
    };

    let pool = thread_pool(cfg.settings.threads)?;
    let needs_tokens = cfg
        .classifier_requests
        .iter()
        .any(|r| classify::find(&r.name).is_some_and(|e| e.needs_tokens));
    let tokens = if needs_tokens {
        let requests = [
            PreprocessRequest::TokenizeTrain,
            PreprocessRequest::TokenizeTest,
        ];
        Some(
            pool.install(|| fulfill(&requests, cfg, &data))
                .map_err(FeatureError::from)?,
        )
    } else {
        None
    };
    let token_stream = |r: PreprocessRequest| {
        tokens
            .as_ref()
            .and_then(|c| c.tokens(&r).ok())
            .map(Vec::as_slice)
    };
    let classifier_data = ClassifierData {
        train: &block.train,
        test: &block.test,
        train_labels: &data.train_labels,
        test_labels: &data.test_labels,
        n_classes: data.n_classes(),
        train_tokens: token_stream(PreprocessRequest::TokenizeTrain),
        test_tokens: token_stream(PreprocessRequest::TokenizeTest),
    };
    let classifiers: Vec<TrainReport> = pool.install(|| {
        cfg.classifier_requests
            .par_iter()
            .map(|r| {
                log::info!("training {}", r.name);
                let report = classify::train_and_evaluate(
                    &r.name,
                    &r.params,
                    &classifier_data,
                    cfg.settings.seed,
                )
                .map_err(|source| RunError::Training {
                    classifier: r.name.clone(),
                    source,
                })?;
                log::info!(
                    "{}: train {:.4}, test {:.4}",
                    r.name,
                    report.train_accuracy,
                    report.test_accuracy
                );
                Ok(report)
            })
            .collect::<Result<_, RunError>>()
    })?;

    let report = RunReport {
        config: cfg.to_ini(),
        threads: cfg.settings.threads,
        preprocess_seconds: extraction.preprocess_seconds,
        features: extraction.timings.clone(),
        merged: BlockShape {
            train: (block.train.n_rows(), block.n_cols()),
            test: (block.test.n_rows(), block.n_cols()),
        },
        exports,
        classifiers,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    write_report(&report, &cfg.output.directory)?;
    Ok(report)
}

/// Writes `report.json` and `report.txt` into `dir`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Report { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report is serializable");
    fs::write(&json_path, json + "\n").map_err(io(&json_path))?;
    let txt_path = dir.join("report.txt");
    fs::write(&txt_path, report.to_text()).map_err(io(&txt_path))?;
    Ok(())
}

/// One line per registered extractor: id, name and arguments.
pub fn list_features() -> String {
    let mut s = String::new();
    for e in features::registry() {
        let _ = writeln!(s, "{:>3}  {:<22} {}", e.id, e.name, e.usage);
    }
    s
}

/// One line per registered classifier: name and parameters.
pub fn list_classifiers() -> String {
    let mut s = String::new();
    for e in classify::registry() {
        let _ = writeln!(s, "{:<22} {}", e.name, e.usage);
    }
    s
}
