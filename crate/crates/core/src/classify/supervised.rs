//! Supervised averaged-embedding text classifier.
//!
//! A sentence is represented by the mean of the embedding rows of its
//! in-vocabulary words and of its hashed word bigrams. A linear softmax
//! layer on top is trained jointly with the embeddings by per-sentence SGD,
//! with the learning rate decaying linearly to zero over all updates.

use std::collections::{BTreeSet, HashMap};

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{argmax, softmax_in_place, ClassifyError};
use crate::hashing::hash_ngram;

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedEmbeddingOptions {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Number of hash buckets for word bigrams; 0 disables bigrams.
    pub buckets: usize,
    pub seed: u64,
}

impl Default for SupervisedEmbeddingOptions {
    fn default() -> Self {
        SupervisedEmbeddingOptions {
            dim: 10,
            epochs: 5,
            lr: 0.1,
            buckets: 1_000_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedEmbeddingModel {
    vocab: HashMap<String, usize>,
    dim: usize,
    buckets: usize,
    n_classes: usize,
    /// Row-major `(vocab + buckets) x dim`.
    input: Vec<f64>,
    /// Row-major `n_classes x dim`.
    output: Vec<f64>,
}

impl SupervisedEmbeddingModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn input_ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        let mut ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.vocab.get(t.as_ref()).copied())
            .collect();
        if self.buckets > 0 {
            let base = self.vocab.len();
            for pair in tokens.windows(2) {
                ids.push(base + hash_ngram(pair) as usize % self.buckets);
            }
        }
        ids
    }

    fn mean_of(&self, ids: &[usize]) -> Vec<f64> {
        let mut h = vec![0.0; self.dim];
        if ids.is_empty() {
            return h;
        }
        for &id in ids {
            for (hj, v) in h
                .iter_mut()
                .zip(&self.input[id * self.dim..(id + 1) * self.dim])
            {
                *hj += v;
            }
        }
        let inv = 1.0 / ids.len() as f64;
        h.iter_mut().for_each(|v| *v *= inv);
        h
    }

    /// The averaged hidden representation of a sentence; zero when it has
    /// no known words and no bigrams.
    pub fn hidden<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        self.mean_of(&self.input_ids(tokens))
    }

    fn output_scores(&self, h: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|k| {
                self.output[k * self.dim..(k + 1) * self.dim]
                    .iter()
                    .zip(h)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn probabilities<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut s = self.output_scores(&self.hidden(tokens));
        softmax_in_place(&mut s);
        s
    }

    pub fn predict<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> Vec<usize> {
        sentences
            .iter()
            .map(|s| argmax(&self.output_scores(&self.hidden(s))))
            .collect()
    }
}

pub fn train_supervised_embedding(
    sentences: &[Vec<String>],
    labels: &[usize],
    n_classes: usize,
    opts: &SupervisedEmbeddingOptions,
) -> Result<SupervisedEmbeddingModel, ClassifyError> {
    if sentences.is_empty() {
        return Err(ClassifyError::EmptyTrainingData);
    }
    if sentences.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            left: sentences.len(),
            right: labels.len(),
        });
    }
    if opts.dim == 0 || opts.lr.is_nan() || opts.lr <= 0.0 || opts.epochs == 0 {
        return Err(ClassifyError::InvalidParameter(
            "dim, epochs and lr must be positive".into(),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(ClassifyError::LabelOutOfRange {
            label: bad,
            n_classes,
        });
    }
    let words: BTreeSet<&str> = sentences.iter().flatten().map(String::as_str).collect();
    let vocab: HashMap<String, usize> = words
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w.to_string(), i))
        .collect();
    let rows = vocab.len() + opts.buckets;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let bound = 1.0 / opts.dim as f64;
    let dist = Uniform::new_inclusive(-bound, bound);
    let mut model = SupervisedEmbeddingModel {
        vocab,
        dim: opts.dim,
        buckets: opts.buckets,
        n_classes,
        input: (0..rows * opts.dim)
            .map(|_| dist.sample(&mut rng))
            .collect(),
        output: vec![0.0; n_classes * opts.dim],
    };

    let ids: Vec<Vec<usize>> = sentences.iter().map(|s| model.input_ids(s)).collect();
    let total = (opts.epochs * sentences.len()) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let dim = opts.dim;
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let lr = opts.lr * (1.0 - step as f64 / total);
            step += 1;
            let sentence_ids = &ids[i];
            if sentence_ids.is_empty() {
                continue;
            }
            let h = model.mean_of(sentence_ids);
            let mut p = model.output_scores(&h);
            softmax_in_place(&mut p);
            let mut grad_h = vec![0.0; dim];
            for (k, &pk) in p.iter().enumerate() {
                let g = pk - f64::from(u8::from(k == labels[i]));
                let row = &mut model.output[k * dim..(k + 1) * dim];
                for j in 0..dim {
                    grad_h[j] += g * row[j];
                    row[j] -= lr * g * h[j];
                }
            }
            let scale = lr / sentence_ids.len() as f64;
            for &id in sentence_ids {
                let row = &mut model.input[id * dim..(id + 1) * dim];
                for j in 0..dim {
                    row[j] -= scale * grad_h[j];
                }
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn disjoint_corpus() -> (Vec<Vec<String>>, Vec<usize>) {
        let a = ["apple", "banana", "cherry", "grape", "melon"];
        let b = ["engine", "wheel", "brake", "piston", "gear"];
        let mut sents = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let (words, label) = if i % 2 == 0 { (&a, 0) } else { (&b, 1) };
            let s: Vec<String> = (0..4).map(|k| words[(i + k * 3) % 5].to_string()).collect();
            sents.push(s);
            labels.push(label);
        }
        (sents, labels)
    }

    fn small_opts() -> SupervisedEmbeddingOptions {
        SupervisedEmbeddingOptions {
            buckets: 1000,
            epochs: 10,
            ..Default::default()
        }
    }

    #[test]
    fn disjoint_vocabularies_are_separated() {
        let (s, y) = disjoint_corpus();
        let m = train_supervised_embedding(&s, &y, 2, &small_opts()).unwrap();
        assert_eq!(m.predict(&s), y);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (s, y) = disjoint_corpus();
        let m = train_supervised_embedding(&s, &y, 2, &small_opts()).unwrap();
        for sent in &s {
            let total: f64 = m.probabilities(sent).iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.hidden(&["unseen"]), vec![0.0; 10]);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let (s, y) = disjoint_corpus();
        let a = train_supervised_embedding(&s, &y, 2, &small_opts()).unwrap();
        let b = train_supervised_embedding(&s, &y, 2, &small_opts()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            train_supervised_embedding(&[], &[], 2, &small_opts()),
            Err(ClassifyError::EmptyTrainingData)
        ));
        let (s, y) = disjoint_corpus();
        let bad = SupervisedEmbeddingOptions {
            dim: 0,
            ..small_opts()
        };
        assert!(train_supervised_embedding(&s, &y, 2, &bad).is_err());
    }
}
