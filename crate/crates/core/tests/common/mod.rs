//! Shared helpers for integration tests: an independent direct-formula
//! Kneser-Ney oracle and synthetic corpus generators.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOS: &str = "<s>";
const EOS: &str = "</s>";
const UNK: &str = "<unk>";

/// Interpolated modified Kneser-Ney computed straight from the recursive
/// definition, over strings, with no precomputed backoff tables.
pub struct KnOracle {
    order: usize,
    vocab: BTreeSet<String>,
    /// `counts[k]`: count of every (k+1)-gram used at order k+1. Raw
    /// counts for the highest order, continuation counts below it.
    counts: Vec<BTreeMap<Vec<String>, u64>>,
    discounts: Vec<[f64; 3]>,
}

impl KnOracle {
    pub fn train(corpus: &[Vec<String>], order: usize) -> KnOracle {
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for t in corpus.iter().flatten() {
            *freq.entry(t).or_default() += 1;
        }
        let mut vocab: BTreeSet<String> = [BOS, EOS, UNK].iter().map(|s| s.to_string()).collect();
        for (t, c) in &freq {
            if *c >= 2 {
                vocab.insert(t.to_string());
            }
        }
        let padded: Vec<Vec<String>> = corpus
            .iter()
            .map(|s| {
                let mut p = vec![BOS.to_string(); order - 1];
                p.extend(s.iter().map(|t| {
                    if vocab.contains(t) {
                        t.clone()
                    } else {
                        UNK.to_string()
                    }
                }));
                p.push(EOS.to_string());
                p
            })
            .collect();

        let mut counts = vec![BTreeMap::new(); order];
        for p in &padded {
            for w in p.windows(order) {
                *counts[order - 1].entry(w.to_vec()).or_insert(0) += 1;
            }
        }
        for k in (1..order).rev() {
            // Distinct left extensions among the n-gram types one order up.
            let mut left: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
            for g in counts[k].keys() {
                left.entry(g[1..].to_vec())
                    .or_default()
                    .insert(g[0].clone());
            }
            counts[k - 1] = left.into_iter().map(|(g, s)| (g, s.len() as u64)).collect();
        }

        let discounts = counts
            .iter()
            .map(|level| {
                let n = |c: u64| level.values().filter(|&&v| v == c).count() as f64;
                let (n1, n2, n3, n4) = (n(1), n(2), n(3), n(4));
                if n1 == 0.0 || n2 == 0.0 || n3 == 0.0 || n4 == 0.0 {
                    [0.75; 3]
                } else {
                    let y = n1 / (n1 + 2.0 * n2);
                    [
                        (1.0 - 2.0 * y * n2 / n1).max(0.0),
                        (2.0 - 3.0 * y * n3 / n2).max(0.0),
                        (3.0 - 4.0 * y * n4 / n3).max(0.0),
                    ]
                }
            })
            .collect();
        KnOracle {
            order,
            vocab,
            counts,
            discounts,
        }
    }

    /// Every token a distribution is defined over.
    pub fn predictable(&self) -> Vec<String> {
        self.vocab.iter().filter(|t| *t != BOS).cloned().collect()
    }

    pub fn vocab(&self) -> Vec<String> {
        self.vocab.iter().cloned().collect()
    }

    fn discount(&self, k: usize, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.discounts[k][0],
            2 => self.discounts[k][1],
            _ => self.discounts[k][2],
        }
    }

    /// `p(w | context)`, using at most the last `order - 1` context tokens.
    pub fn prob(&self, context: &[&str], w: &str) -> f64 {
        let map = |t: &str| {
            if self.vocab.contains(t) {
                t.to_string()
            } else {
                UNK.to_string()
            }
        };
        let mut ctx: Vec<String> = context.iter().map(|t| map(t)).collect();
        let keep = ctx.len().min(self.order - 1);
        ctx.drain(..ctx.len() - keep);
        self.p(&ctx, &map(w))
    }

    fn p(&self, ctx: &[String], w: &str) -> f64 {
        let k = ctx.len();
        let lower = if k == 0 {
            1.0 / (self.vocab.len() - 1) as f64
        } else {
            self.p(&ctx[1..], w)
        };
        let level = &self.counts[k];
        let mut total = 0u64;
        let mut mass = 0.0;
        let mut c_w = 0u64;
        for (g, &c) in level {
            if g[..k] == *ctx {
                total += c;
                mass += self.discount(k, c);
                if g[k] == w {
                    c_w = c;
                }
            }
        }
        if total == 0 {
            return lower;
        }
        let total = total as f64;
        (c_w as f64 - self.discount(k, c_w)) / total + mass / total * lower
    }
}

/// Whitespace-split sentences.
pub fn sentences(lines: &[&str]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

/// Random sentences of 1 to `max_len` tokens drawn from `words`.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    words: &[&str],
    n: usize,
    max_len: usize,
) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| words.choose(rng).unwrap().to_string())
                .collect()
        })
        .collect()
}

/// Two-class corpus whose classes use disjoint 50-word vocabularies.
/// Returns (train text, train labels, test text, test labels).
pub fn disjoint_two_class(
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> (Vec<String>, Vec<String>, Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: [Vec<String>; 2] = [
        (0..50).map(|i| format!("alpha{i}")).collect(),
        (0..50).map(|i| format!("beta{i}")).collect(),
    ];
    let mut make = |n: usize| {
        let mut text = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let class = rng.gen_range(0..2);
            let len = rng.gen_range(5..15);
            let words: Vec<&str> = (0..len)
                .map(|_| vocab[class].choose(&mut rng).unwrap().as_str())
                .collect();
            text.push(words.join(" "));
            labels.push(if class == 0 { "alpha" } else { "beta" }.to_string());
        }
        (text, labels)
    };
    let (a, b) = make(n_train);
    let (c, d) = make(n_test);
    (a, b, c, d)
}
