//! Writers for merged feature blocks (CSV, svmlight, sparse ARFF) and a
//! reader for svmlight files.

mod arff;
mod csv;
mod svmlight;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::sparse::{FeatureBlock, SparseMatrix};

pub use arff::{arff_quote, write_arff};
pub use csv::{csv_field, write_csv};
pub use svmlight::{read_svmlight, read_svmlight_file, write_svmlight};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("svmlight line {line}: {message}")]
    Svmlight { line: usize, message: String },
    #[error("{split} split has {rows} rows but {labels} labels")]
    LabelMismatch {
        split: &'static str,
        rows: usize,
        labels: usize,
    },
    #[error("label id {0} has no name")]
    UnknownLabel(usize),
    #[error("no export format requested")]
    NoFormats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExportFormat {
    Csv,
    Svmlight,
    Arff,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [
        ExportFormat::Csv,
        ExportFormat::Svmlight,
        ExportFormat::Arff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Svmlight => "svmlight",
            ExportFormat::Arff => "arff",
        }
    }

    /// File extension of the per-split files.
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Svmlight => "svm",
            ExportFormat::Arff => "arff",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown export format `{s}` (expected csv, svmlight or arff)"))
    }
}

/// One split of a block with its labels.
pub struct Split<'a> {
    pub name: &'static str,
    pub matrix: &'a SparseMatrix,
    pub labels: &'a [usize],
}

pub struct ExportJob<'a> {
    pub block: &'a FeatureBlock,
    pub train_labels: &'a [usize],
    pub test_labels: &'a [usize],
    pub label_names: &'a [String],
    pub formats: &'a [ExportFormat],
    pub directory: &'a Path,
}

impl<'a> ExportJob<'a> {
    fn splits(&self) -> [Split<'a>; 2] {
        [
            Split {
                name: "train",
                matrix: &self.block.train,
                labels: self.train_labels,
            },
            Split {
                name: "test",
                matrix: &self.block.test,
                labels: self.test_labels,
            },
        ]
    }

    fn validate(&self) -> Result<(), ExportError> {
        if self.formats.is_empty() {
            return Err(ExportError::NoFormats);
        }
        for s in self.splits() {
            if s.matrix.n_rows() != s.labels.len() {
                return Err(ExportError::LabelMismatch {
                    split: s.name,
                    rows: s.matrix.n_rows(),
                    labels: s.labels.len(),
                });
            }
            if let Some(&bad) = s.labels.iter().find(|&&l| l >= self.label_names.len()) {
                return Err(ExportError::UnknownLabel(bad));
            }
        }
        Ok(())
    }
}

/// Renders `v` in the shortest form that parses back to the same value.
pub(crate) fn number(v: f64) -> String {
    format!("{v}")
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), ExportError> {
    let err = io_error(path);
    let mut w = BufWriter::new(File::create(path).map_err(&err)?);
    body(&mut w).map_err(&err)?;
    w.flush().map_err(&err)
}

/// Writes every requested format for both splits and returns the paths
/// written, in format order.
pub fn export(job: &ExportJob) -> Result<Vec<PathBuf>, ExportError> {
    job.validate()?;
    fs::create_dir_all(job.directory).map_err(io_error(job.directory))?;
    let mut formats = job.formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for format in formats {
        for split in job.splits() {
            let path = job
                .directory
                .join(format!("{}.{}", split.name, format.extension()));
            write_file(&path, |w| match format {
                ExportFormat::Csv => write_csv(w, &job.block.descriptor, &split, job.label_names),
                ExportFormat::Svmlight => write_svmlight(w, split.matrix, split.labels),
                ExportFormat::Arff => write_arff(w, &job.block.descriptor, &split, job.label_names),
            })?;
            written.push(path);
        }
        if format == ExportFormat::Svmlight {
            let path = job.directory.join("labels.txt");
            write_file(&path, |w| {
                for (i, name) in job.label_names.iter().enumerate() {
                    writeln!(w, "{}\t{}", i + 1, name)?;
                }
                Ok(())
            })?;
            written.push(path);
        }
    }
    Ok(written)
}
