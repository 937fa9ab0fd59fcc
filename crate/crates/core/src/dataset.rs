//! Train/test split of raw sentences with class labels.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{split}: {sentences} sentences but {labels} labels")]
    LengthMismatch {
        split: &'static str,
        sentences: usize,
        labels: usize,
    },
    #[error("{split} label id {id} out of range for {n_labels} label names")]
    LabelOutOfRange {
        split: &'static str,
        id: usize,
        n_labels: usize,
    },
    #[error("{path}:{line}: empty label")]
    EmptyLabel { path: PathBuf, line: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub train_sentences: Vec<String>,
    pub test_sentences: Vec<String>,
    pub train_labels: Vec<usize>,
    pub test_labels: Vec<usize>,
    pub label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from label strings. Label ids follow the sorted
    /// order of the distinct names across both splits.
    pub fn from_labelled<S: AsRef<str>>(
        train: Vec<String>,
        train_labels: &[S],
        test: Vec<String>,
        test_labels: &[S],
    ) -> Result<Self, DatasetError> {
        let names: BTreeSet<&str> = train_labels
            .iter()
            .chain(test_labels)
            .map(|s| s.as_ref())
            .collect();
        let label_names: Vec<String> = names.into_iter().map(str::to_string).collect();
        let id_of = |s: &S| {
            label_names
                .binary_search_by(|n| n.as_str().cmp(s.as_ref()))
                .unwrap()
        };
        let dataset = Dataset {
            train_labels: train_labels.iter().map(id_of).collect(),
            test_labels: test_labels.iter().map(id_of).collect(),
            train_sentences: train,
            test_sentences: test,
            label_names,
        };
        dataset.validate()?;
        Ok(dataset)
    }

    /// Reads one-sentence-per-line text files and one-label-per-line files.
    pub fn load(
        train_text: &Path,
        train_labels: &Path,
        test_text: &Path,
        test_labels: &Path,
    ) -> Result<Self, DatasetError> {
        let train = read_lines(train_text)?;
        let test = read_lines(test_text)?;
        let train_l = read_labels(train_labels)?;
        let test_l = read_labels(test_labels)?;
        Self::from_labelled(train, &train_l, test, &test_l)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let n_labels = self.label_names.len();
        for (split, sentences, labels) in [
            ("train", &self.train_sentences, &self.train_labels),
            ("test", &self.test_sentences, &self.test_labels),
        ] {
            if sentences.len() != labels.len() {
                return Err(DatasetError::LengthMismatch {
                    split,
                    sentences: sentences.len(),
                    labels: labels.len(),
                });
            }
            if let Some(&id) = labels.iter().find(|&&id| id >= n_labels) {
                return Err(DatasetError::LabelOutOfRange {
                    split,
                    id,
                    n_labels,
                });
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }
}

/// Reads a UTF-8 file as lines, dropping a single trailing newline.
pub fn read_lines(path: &Path) -> Result<Vec<String>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect())
}

fn read_labels(path: &Path) -> Result<Vec<String>, DatasetError> {
    let lines = read_lines(path)?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let label = l.trim().to_string();
            if label.is_empty() {
                Err(DatasetError::EmptyLabel {
                    path: path.to_path_buf(),
                    line: i + 1,
                })
            } else {
                Ok(label)
            }
        })
        .collect()
}
