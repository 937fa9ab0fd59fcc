//! Greedy averaged-perceptron part-of-speech tagger.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::PreprocessError;

/// A tagged sentence: `(token, tag)` pairs.
pub type TaggedSentence = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    tagset: Vec<String>,
    /// Averaged weight per feature, indexed by tag position in `tagset`.
    weights: HashMap<String, Vec<f64>>,
}

const START: &str = "<START>";
const END: &str = "<END>";

fn suffix(word: &str, len: usize) -> Option<&str> {
    let start = word.char_indices().rev().nth(len - 1)?.0;
    Some(&word[start..])
}

fn features(words: &[String], i: usize, prev_tag: &str) -> Vec<String> {
    let word = &words[i];
    let lower = word.to_lowercase();
    let mut f = Vec::with_capacity(12);
    f.push("bias".to_string());
    f.push(format!("w={word}"));
    f.push(format!("lw={lower}"));
    for len in 1..=3 {
        if let Some(s) = suffix(&lower, len) {
            f.push(format!("s{len}={s}"));
        }
    }
    f.push(format!("pt={prev_tag}"));
    let prev = if i == 0 {
        START.to_string()
    } else {
        words[i - 1].to_lowercase()
    };
    f.push(format!("pw={prev}"));
    let next = words
        .get(i + 1)
        .map_or(END.to_string(), |w| w.to_lowercase());
    f.push(format!("nw={next}"));
    if word.chars().any(|c| c.is_numeric()) {
        f.push("shape=digit".to_string());
    }
    if word.contains('-') {
        f.push("shape=hyphen".to_string());
    }
    if word.chars().next().is_some_and(char::is_uppercase) {
        f.push("shape=cap".to_string());
    }
    f
}

#[derive(Clone, Default)]
struct Accumulator {
    weight: f64,
    total: f64,
    stamp: u64,
}

struct Trainer {
    n_tags: usize,
    weights: HashMap<String, Vec<Accumulator>>,
    step: u64,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.n_tags];
        for f in feats {
            if let Some(ws) = self.weights.get(f) {
                for (s, w) in scores.iter_mut().zip(ws) {
                    *s += w.weight;
                }
            }
        }
        scores
    }

    fn bump(&mut self, feat: &str, tag: usize, delta: f64) {
        let step = self.step;
        let n_tags = self.n_tags;
        let acc = &mut self
            .weights
            .entry(feat.to_string())
            .or_insert_with(|| vec![Accumulator::default(); n_tags])[tag];
        acc.total += (step - acc.stamp) as f64 * acc.weight;
        acc.stamp = step;
        acc.weight += delta;
    }

    fn finish(self, tagset: Vec<String>) -> TaggerModel {
        let step = self.step.max(1);
        let weights = self
            .weights
            .into_iter()
            .map(|(f, accs)| {
                let avg = accs
                    .iter()
                    .map(|a| (a.total + (step - a.stamp) as f64 * a.weight) / step as f64)
                    .collect();
                (f, avg)
            })
            .collect();
        TaggerModel { tagset, weights }
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Trains a tagger for `epochs` passes over the corpus, shuffling the
/// sentence order each epoch with a generator seeded by `seed`.
pub fn train_tagger(
    corpus: &[TaggedSentence],
    epochs: usize,
    seed: u64,
) -> Result<TaggerModel, PreprocessError> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(PreprocessError::EmptyTaggedCorpus);
    }
    let tagset: Vec<String> = corpus
        .iter()
        .flatten()
        .map(|(_, t)| t.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tag_index: HashMap<&str, usize> = tagset
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let mut trainer = Trainer {
        n_tags: tagset.len(),
        weights: HashMap::new(),
        step: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let sentence = &corpus[si];
            let words: Vec<String> = sentence.iter().map(|(w, _)| w.clone()).collect();
            let mut prev = START.to_string();
            for (i, (_, gold)) in sentence.iter().enumerate() {
                trainer.step += 1;
                let feats = features(&words, i, &prev);
                let guess = argmax(&trainer.scores(&feats));
                let truth = tag_index[gold.as_str()];
                if guess != truth {
                    for f in &feats {
                        trainer.bump(f, truth, 1.0);
                        trainer.bump(f, guess, -1.0);
                    }
                }
                prev = tagset[guess].clone();
            }
        }
    }
    Ok(trainer.finish(tagset))
}

impl TaggerModel {
    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    /// Greedy left-to-right decoding. Ties go to the tag that sorts first.
    pub fn tag(&self, tokens: &[String]) -> Vec<String> {
        let mut tags = Vec::with_capacity(tokens.len());
        let mut prev = START.to_string();
        for i in 0..tokens.len() {
            let mut scores = vec![0.0; self.tagset.len()];
            for f in features(tokens, i, &prev) {
                if let Some(ws) = self.weights.get(&f) {
                    for (s, w) in scores.iter_mut().zip(ws) {
                        *s += w;
                    }
                }
            }
            let best = self.tagset[argmax(&scores)].clone();
            prev = best.clone();
            tags.push(best);
        }
        tags
    }
}

/// Parses one line of `token_TAG` pairs separated by whitespace. The tag
/// is taken after the last underscore.
pub fn parse_tagged_line(line: &str, line_no: usize) -> Result<TaggedSentence, PreprocessError> {
    line.split_whitespace()
        .map(|pair| match pair.rsplit_once('_') {
            Some((tok, tag)) if !tok.is_empty() && !tag.is_empty() => {
                Ok((tok.to_string(), tag.to_string()))
            }
            _ => Err(PreprocessError::TaggedCorpus {
                line: line_no,
                message: format!("expected token_TAG, got `{pair}`"),
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(pairs: &[(&str, &str)]) -> TaggedSentence {
        pairs
            .iter()
            .map(|(w, t)| (w.to_string(), t.to_string()))
            .collect()
    }

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    /// Twenty sentences over a vocabulary where each word has one tag.
    fn toy_corpus() -> Vec<TaggedSentence> {
        let dets = ["the", "a"];
        let nouns = ["dog", "cat", "bird", "fish", "horse"];
        let verbs = ["runs", "sleeps", "eats", "sings"];
        let advs = ["quickly", "loudly"];
        (0..20)
            .map(|i| {
                let mut s = vec![
                    (dets[i % 2], "DT"),
                    (nouns[i % 5], "NN"),
                    (verbs[(i / 2) % 4], "VB"),
                ];
                if i % 3 == 0 {
                    s.push((advs[i % 2], "RB"));
                }
                sent(&s)
            })
            .collect()
    }

    #[test]
    fn unambiguous_word_keeps_its_tag() {
        let mut corpus: Vec<TaggedSentence> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    sent(&[("the", "DT"), ("dog", "NN"), ("barks", "VB")])
                } else {
                    sent(&[("dog", "NN"), ("eats", "VB"), ("food", "NN")])
                }
            })
            .collect();
        corpus.push(sent(&[("a", "DT"), ("big", "JJ"), ("cat", "NN")]));
        let model = train_tagger(&corpus, 5, 7).unwrap();
        for context in [
            toks(&["dog"]),
            toks(&["the", "dog"]),
            toks(&["big", "dog", "barks"]),
            toks(&["food", "eats", "dog"]),
        ] {
            let tags = model.tag(&context);
            let pos = context.iter().position(|w| w == "dog").unwrap();
            assert_eq!(tags[pos], "NN", "context {context:?}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = vec![sent(&[("time", "NN"), ("flies", "VB")])];
        let a = train_tagger(&corpus, 1, 3).unwrap();
        let b = train_tagger(&corpus, 1, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn toy_corpus_training_accuracy_is_perfect() {
        let corpus = toy_corpus();
        let model = train_tagger(&corpus, 5, 1).unwrap();
        for s in &corpus {
            let words: Vec<String> = s.iter().map(|(w, _)| w.clone()).collect();
            let gold: Vec<String> = s.iter().map(|(_, t)| t.clone()).collect();
            assert_eq!(model.tag(&words), gold);
        }
    }

    #[test]
    fn tag_edge_cases() {
        let model = train_tagger(&toy_corpus(), 3, 1).unwrap();
        assert!(model.tag(&[]).is_empty());
        let input = toks(&["the", "zebra", "gallops", "42"]);
        let first = model.tag(&input);
        assert_eq!(first.len(), input.len());
        assert_eq!(first, model.tag(&input));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            train_tagger(&[], 1, 0),
            Err(PreprocessError::EmptyTaggedCorpus)
        ));
    }

    #[test]
    fn parses_tagged_lines() {
        let s = parse_tagged_line("New_NNP York_NNP is_VBZ big_JJ", 1).unwrap();
        assert_eq!(s[0], ("New".to_string(), "NNP".to_string()));
        let s = parse_tagged_line("snake_case_NN", 1).unwrap();
        assert_eq!(s[0], ("snake_case".to_string(), "NN".to_string()));
        assert!(parse_tagged_line("oops", 4).is_err());
    }

    #[test]
    fn suffixes_are_char_based() {
        assert_eq!(suffix("über", 3), Some("ber"));
        assert_eq!(suffix("ab", 3), None);
        assert_eq!(suffix("é", 1), Some("é"));
    }
}
