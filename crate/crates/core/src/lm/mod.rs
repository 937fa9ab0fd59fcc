//! Interpolated modified Kneser-Ney n-gram language model.
//!
//! Training pads every sentence with `order - 1` start symbols and one end
//! symbol. The highest order is estimated from raw counts, lower orders from
//! continuation counts (number of distinct left extensions), each with three
//! count-dependent discounts. The unigram level interpolates with a uniform
//! distribution over the vocabulary minus `<s>`.
//!
//! The estimated interpolated probabilities are folded into backoff form:
//! every seen n-gram stores `log10 p(w | h)` and every seen context stores
//! `log10 gamma(h)`, so a query walks down from the longest matching n-gram.

mod persist;

use std::collections::HashMap;

use thiserror::Error;

pub use persist::{FORMAT_VERSION, MAGIC};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;

/// Discount used for an order whose count-of-counts statistics are too
/// sparse for the closed-form estimate.
pub const FALLBACK_DISCOUNT: f64 = 0.75;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,
    #[error("language model order must be at least 1")]
    ZeroOrder,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a language model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported language model file version {0}")]
    BadVersion(u32),
    #[error("corrupt language model file: {0}")]
    Corrupt(String),
}

/// How training tokens are routed to `<unk>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownRule {
    /// Types seen exactly once in training are replaced by `<unk>`.
    #[default]
    Singletons,
    /// Only the uniform interpolation gives `<unk>` mass.
    UniformOnly,
}

impl UnknownRule {
    fn code(self) -> u8 {
        match self {
            UnknownRule::Singletons => 0,
            UnknownRule::UniformOnly => 1,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(UnknownRule::Singletons),
            1 => Some(UnknownRule::UniformOnly),
            _ => None,
        }
    }
}

/// Discounts for counts of one, two, and three or more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Discounts {
    fn for_count(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3,
        }
    }

    /// Closed-form estimate from the number of n-grams seen exactly 1..4
    /// times. Returns `None` when any of those classes is empty.
    pub fn estimate(n: [u64; 4]) -> Option<Discounts> {
        if n.contains(&0) {
            return None;
        }
        let [n1, n2, n3, n4] = n.map(|k| k as f64);
        let y = n1 / (n1 + 2.0 * n2);
        Some(Discounts {
            d1: (1.0 - 2.0 * y * n2 / n1).max(0.0),
            d2: (2.0 - 3.0 * y * n3 / n2).max(0.0),
            d3: (3.0 - 4.0 * y * n4 / n3).max(0.0),
        })
    }

    pub fn fallback() -> Discounts {
        Discounts {
            d1: FALLBACK_DISCOUNT,
            d2: FALLBACK_DISCOUNT,
            d3: FALLBACK_DISCOUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnLanguageModel {
    order: usize,
    unknown: UnknownRule,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `probs[n - 1]`: n-gram ids to `log10 p(w | h)`.
    probs: Vec<HashMap<Vec<u32>, f64>>,
    /// `backoffs[n - 1]`: context ids of length `n - 1` to `log10 gamma(h)`,
    /// used when an order-`n` n-gram is missing. Empty for `n = 1`.
    backoffs: Vec<HashMap<Vec<u32>, f64>>,
    discounts: Vec<Discounts>,
    fallback_orders: Vec<usize>,
}

/// Trains with the default unknown-word rule.
pub fn train_kn(corpus: &[Vec<String>], order: usize) -> Result<KnLanguageModel, LmError> {
    train_kn_with(corpus, order, UnknownRule::default())
}

pub fn train_kn_with(
    corpus: &[Vec<String>],
    order: usize,
    unknown: UnknownRule,
) -> Result<KnLanguageModel, LmError> {
    if order == 0 {
        return Err(LmError::ZeroOrder);
    }
    if corpus.is_empty() {
        return Err(LmError::EmptyCorpus);
    }

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in corpus {
        for t in s {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut types: Vec<&str> = freq
        .iter()
        .filter(|&(t, &c)| {
            !matches!(*t, BOS | EOS | UNK) && !(unknown == UnknownRule::Singletons && c == 1)
        })
        .map(|(t, _)| *t)
        .collect();
    types.sort_unstable();
    let mut vocab: Vec<String> = vec![BOS.into(), EOS.into(), UNK.into()];
    vocab.extend(types.iter().map(|t| t.to_string()));
    let index: HashMap<String, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();

    // counts[n - 1]: adjusted counts of order-n n-grams.
    let mut counts: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    for s in corpus {
        let mut padded = vec![BOS_ID; order - 1];
        padded.extend(s.iter().map(|t| *index.get(t.as_str()).unwrap_or(&UNK_ID)));
        padded.push(EOS_ID);
        for gram in padded.windows(order) {
            *counts[order - 1].entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    for n in (1..order).rev() {
        let mut lower: HashMap<Vec<u32>, u64> = HashMap::new();
        for gram in counts[n].keys() {
            *lower.entry(gram[1..].to_vec()).or_insert(0) += 1;
        }
        counts[n - 1] = lower;
    }

    let mut discounts = Vec::with_capacity(order);
    let mut fallback_orders = Vec::new();
    for (i, level) in counts.iter().enumerate() {
        let mut coc = [0u64; 4];
        for &c in level.values() {
            if (1..=4).contains(&c) {
                coc[c as usize - 1] += 1;
            }
        }
        discounts.push(Discounts::estimate(coc).unwrap_or_else(|| {
            log::info!(
                "order {}: count-of-counts {:?} too sparse, using discount {}",
                i + 1,
                coc,
                FALLBACK_DISCOUNT
            );
            fallback_orders.push(i + 1);
            Discounts::fallback()
        }));
    }

    // Linear-domain interpolated probabilities, lowest order first.
    let scored = vocab.len() - 1;
    let uniform = 1.0 / scored as f64;
    let mut lin: Vec<HashMap<Vec<u32>, f64>> = Vec::with_capacity(order);
    let mut gammas: Vec<HashMap<Vec<u32>, f64>> = Vec::with_capacity(order);
    for n in 1..=order {
        let level = &counts[n - 1];
        let d = discounts[n - 1];
        let mut totals: HashMap<&[u32], (u64, f64)> = HashMap::new();
        for (gram, &c) in level {
            let e = totals.entry(&gram[..n - 1]).or_insert((0, 0.0));
            e.0 += c;
            e.1 += d.for_count(c);
        }
        let gamma: HashMap<Vec<u32>, f64> = totals
            .iter()
            .map(|(ctx, &(total, mass))| (ctx.to_vec(), mass / total as f64))
            .collect();
        let mut probs: HashMap<Vec<u32>, f64> = HashMap::new();
        if n == 1 {
            let (total, mass) = totals.get(&[][..]).copied().unwrap_or((0, 0.0));
            let g = if total == 0 { 1.0 } else { mass / total as f64 };
            for w in 1..vocab.len() as u32 {
                let c = level.get(&vec![w]).copied().unwrap_or(0);
                let alpha = if total == 0 {
                    0.0
                } else {
                    (c as f64 - d.for_count(c)) / total as f64
                };
                probs.insert(vec![w], alpha + g * uniform);
            }
        } else {
            for (gram, &c) in level {
                let ctx = &gram[..n - 1];
                let total = totals[ctx].0 as f64;
                let alpha = (c as f64 - d.for_count(c)) / total;
                let lower = lin_lookup(&lin, &gammas, &gram[1..]);
                probs.insert(gram.clone(), alpha + gamma[ctx] * lower);
            }
        }
        lin.push(probs);
        gammas.push(gamma);
    }

    let probs = lin
        .into_iter()
        .map(|m| m.into_iter().map(|(k, p)| (k, p.log10())).collect())
        .collect();
    let backoffs = gammas
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            if i == 0 {
                HashMap::new()
            } else {
                m.into_iter().map(|(k, g)| (k, g.log10())).collect()
            }
        })
        .collect();

    Ok(KnLanguageModel {
        order,
        unknown,
        vocab,
        index,
        probs,
        backoffs,
        discounts,
        fallback_orders,
    })
}

/// Interpolated probability of `gram` (context then word) from the
/// linear-domain tables built so far.
fn lin_lookup(
    lin: &[HashMap<Vec<u32>, f64>],
    gammas: &[HashMap<Vec<u32>, f64>],
    gram: &[u32],
) -> f64 {
    let n = gram.len();
    if let Some(&p) = lin[n - 1].get(gram) {
        return p;
    }
    let g = gammas[n - 1].get(&gram[..n - 1]).copied().unwrap_or(1.0);
    g * lin_lookup(lin, gammas, &gram[1..])
}

impl KnLanguageModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn unknown_rule(&self) -> UnknownRule {
        self.unknown
    }

    /// All vocabulary entries, starting with `<s>`, `</s>`, `<unk>`.
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn discounts(&self) -> &[Discounts] {
        &self.discounts
    }

    /// Orders that fell back to the fixed discount during training.
    pub fn fallback_orders(&self) -> &[usize] {
        &self.fallback_orders
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    fn log10_prob_ids(&self, context: &[u32], word: u32) -> f64 {
        let mut ctx = context;
        if ctx.len() >= self.order {
            ctx = &ctx[ctx.len() - (self.order - 1)..];
        }
        let mut acc = 0.0;
        loop {
            let n = ctx.len() + 1;
            let mut gram = Vec::with_capacity(n);
            gram.extend_from_slice(ctx);
            gram.push(word);
            if let Some(&p) = self.probs[n - 1].get(&gram) {
                return acc + p;
            }
            if ctx.is_empty() {
                // Only reachable for <s>, which is never predicted.
                return f64::NEG_INFINITY;
            }
            acc += self.backoffs[n - 1].get(ctx).copied().unwrap_or(0.0);
            ctx = &ctx[1..];
        }
    }

    /// `log10 p(word | context)`. Unknown tokens map to `<unk>`; only the
    /// last `order - 1` context tokens are used.
    pub fn log10_prob(&self, context: &[&str], word: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|t| self.id(t)).collect();
        self.log10_prob_ids(&ids, self.id(word))
    }

    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        10f64.powf(self.log10_prob(context, word))
    }

    /// `p(w | context)` for every vocabulary entry except `<s>`.
    pub fn distribution(&self, context: &[&str]) -> Vec<(String, f64)> {
        self.vocab[1..]
            .iter()
            .map(|w| (w.clone(), self.prob(context, w)))
            .collect()
    }

    /// Per-position `log10` probabilities of a sentence, including `</s>`.
    pub fn score_positions<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut history = vec![BOS_ID; self.order - 1];
        let mut out = Vec::with_capacity(tokens.len() + 1);
        for w in tokens.iter().map(|t| self.id(t.as_ref())).chain([EOS_ID]) {
            let ctx = &history[history.len() - (self.order - 1)..];
            out.push(self.log10_prob_ids(ctx, w));
            history.push(w);
        }
        out
    }

    /// Total `log10` probability of a sentence including `</s>`.
    pub fn logprob10<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        self.score_positions(tokens).iter().sum()
    }

    /// `10^(-logprob10 / (n + 1))` for a sentence of `n` tokens.
    pub fn perplexity<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        10f64.powf(-self.logprob10(tokens) / (tokens.len() + 1) as f64)
    }

    /// Mean surprisal in bits over the `n + 1` scored positions.
    pub fn surprisal_bits<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        -self.logprob10(tokens) / (tokens.len() + 1) as f64 / std::f64::consts::LOG10_2
    }

    /// `[logprob10, perplexity, mean surprisal bits]` in one pass.
    pub fn sentence_scores<S: AsRef<str>>(&self, tokens: &[S]) -> [f64; 3] {
        let lp = self.logprob10(tokens);
        let per = lp / (tokens.len() + 1) as f64;
        [lp, 10f64.powf(-per), -per / std::f64::consts::LOG10_2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(String::from).collect())
            .collect()
    }

    fn assert_normalized(m: &KnLanguageModel, ctx: &[&str]) {
        let sum: f64 = m.distribution(ctx).iter().map(|(_, p)| p).sum();
        assert!((sum - 1.0).abs() < 1e-9, "context {ctx:?} sums to {sum}");
    }

    #[test]
    fn discounts_closed_form() {
        let d = Discounts::estimate([10, 5, 3, 2]).unwrap();
        let y = 10.0 / 20.0;
        assert!((d.d1 - (1.0 - 2.0 * y * 0.5)).abs() < 1e-15);
        assert!((d.d2 - (2.0 - 3.0 * y * 3.0 / 5.0)).abs() < 1e-15);
        assert!((d.d3 - (3.0 - 4.0 * y * 2.0 / 3.0)).abs() < 1e-15);
        assert!(Discounts::estimate([3, 0, 1, 1]).is_none());
    }

    #[test]
    fn sparse_orders_fall_back() {
        let m = train_kn(&corpus(&["a a b"]), 2).unwrap();
        assert_eq!(m.fallback_orders(), &[1, 2]);
        assert_eq!(m.discounts()[1], Discounts::fallback());
    }

    #[test]
    fn tiny_corpus_normalizes() {
        let m = train_kn(&corpus(&["a a b"]), 2).unwrap();
        for ctx in [&[][..], &["a"], &["<unk>"], &["<s>"], &["zzz"]] {
            assert_normalized(&m, ctx);
        }
    }

    #[test]
    fn equal_frequency_types_are_uniform() {
        let m = train_kn_with(&corpus(&["x y z", "z y x"]), 1, UnknownRule::Singletons).unwrap();
        let dist = m.distribution(&[]);
        let p = |w: &str| dist.iter().find(|(t, _)| t == w).unwrap().1;
        assert_eq!(p("x"), p("y"));
        assert_eq!(p("y"), p("z"));
        assert!(p("<unk>") > 0.0);
        assert_normalized(&m, &[]);
    }

    #[test]
    fn singletons_route_to_unk() {
        let m = train_kn(&corpus(&["a a b"]), 2).unwrap();
        assert_eq!(m.vocab(), &["<s>", "</s>", "<unk>", "a"]);
        assert_eq!(m.prob(&["a"], "b"), m.prob(&["a"], "never-seen"));
    }

    #[test]
    fn scoring_identities() {
        let m = train_kn(&corpus(&["the cat sat", "the dog sat", "a cat ran"]), 3).unwrap();
        let s = ["the", "cat", "ran"];
        let lp = m.logprob10(&s);
        let ppl = m.perplexity(&s);
        let bits = m.surprisal_bits(&s);
        assert!((ppl - 2f64.powf(bits)).abs() < 1e-9 * ppl);
        assert!((ppl - 10f64.powf(-lp / 4.0)).abs() < 1e-9 * ppl);
        assert!(ppl >= 1.0);
        assert_eq!(m.sentence_scores(&s), [lp, ppl, bits]);
        assert_eq!(m.logprob10(&s), m.logprob10(&s));
        // The empty sentence scores only </s>.
        assert_eq!(
            m.logprob10::<&str>(&[]),
            m.log10_prob(&["<s>", "<s>"], "</s>")
        );
    }

    #[test]
    fn training_is_deterministic() {
        let c = corpus(&["a b c a", "b c a b", "c c a"]);
        assert_eq!(train_kn(&c, 3).unwrap(), train_kn(&c, 3).unwrap());
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(train_kn(&[], 2), Err(LmError::EmptyCorpus)));
        assert!(matches!(
            train_kn(&corpus(&["a"]), 0),
            Err(LmError::ZeroOrder)
        ));
    }
}
