use std::collections::{BTreeMap, HashMap};

/// Corpus frequencies of order-`n` n-grams that reach the cutoff. Keys
/// iterate in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramCountTable {
    pub order: usize,
    pub cutoff: usize,
    pub counts: BTreeMap<Vec<String>, usize>,
}

impl NgramCountTable {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Column index of each n-gram under lexicographic ordering.
    pub fn index(&self) -> HashMap<&[String], usize> {
        self.counts
            .keys()
            .enumerate()
            .map(|(i, k)| (k.as_slice(), i))
            .collect()
    }
}

/// Counts all within-sentence n-grams (no padding) and keeps those with
/// frequency at least `cutoff`.
pub fn count_ngrams(sentences: &[Vec<String>], n: usize, cutoff: usize) -> NgramCountTable {
    assert!(n >= 1 && cutoff >= 1, "n and cutoff must be at least 1");
    let mut raw: HashMap<&[String], usize> = HashMap::new();
    for s in sentences {
        for gram in s.windows(n) {
            *raw.entry(gram).or_insert(0) += 1;
        }
    }
    let counts = raw
        .into_iter()
        .filter(|&(_, c)| c >= cutoff)
        .map(|(g, c)| (g.to_vec(), c))
        .collect();
    NgramCountTable {
        order: n,
        cutoff,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(s: &[&[&str]]) -> Vec<Vec<String>> {
        s.iter()
            .map(|x| x.iter().map(|w| w.to_string()).collect())
            .collect()
    }

    /// Hand enumeration of windows, independent of `slice::windows`.
    fn brute_force(sentences: &[Vec<String>], n: usize) -> BTreeMap<Vec<String>, usize> {
        let mut out = BTreeMap::new();
        for s in sentences {
            let mut start = 0;
            while start + n <= s.len() {
                let mut key = Vec::new();
                for k in 0..n {
                    key.push(s[start + k].clone());
                }
                *out.entry(key).or_insert(0) += 1;
                start += 1;
            }
        }
        out
    }

    #[test]
    fn unigram_cutoff_drops_rare() {
        let s = stream(&[&["a", "b", "a"], &["b", "c"]]);
        let t = count_ngrams(&s, 1, 2);
        let expected: BTreeMap<Vec<String>, usize> =
            [(vec!["a".to_string()], 2), (vec!["b".to_string()], 2)].into();
        assert_eq!(t.counts, expected);
    }

    #[test]
    fn order_longer_than_sentences() {
        let s = stream(&[&["a", "b"], &["c"]]);
        assert!(count_ngrams(&s, 3, 1).is_empty());
    }

    #[test]
    fn no_cross_sentence_ngrams() {
        let s = stream(&[&["a"], &["b"]]);
        assert!(count_ngrams(&s, 2, 1).is_empty());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            sents in prop::collection::vec(prop::collection::vec("[a-d]", 0..7), 0..6),
            n in 1usize..4,
            cutoff in 1usize..4,
        ) {
            let t = count_ngrams(&sents, n, cutoff);
            let mut expected = brute_force(&sents, n);
            if cutoff == 1 {
                prop_assert_eq!(&t.counts, &expected);
            }
            expected.retain(|_, c| *c >= cutoff);
            prop_assert_eq!(&t.counts, &expected);
            prop_assert!(t.counts.iter().all(|(k, &c)| k.len() == n && c >= cutoff));
        }
    }
}
