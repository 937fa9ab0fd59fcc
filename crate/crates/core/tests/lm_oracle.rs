//! The Kneser-Ney model against the direct-formula oracle on random corpora.

mod common;

use featforge::lm::train_kn;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_corpus, KnOracle};

const WORDS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn matches_oracle_at_every_order(seed in any::<u64>(), order in 1usize..=4, n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = random_corpus(&mut rng, &WORDS, n, 7);
        let model = train_kn(&corpus, order).unwrap();
        let oracle = KnOracle::train(&corpus, order);
        let mut ours = model.vocab().to_vec();
        ours.sort();
        prop_assert_eq!(ours, oracle.vocab());
        let vocab = oracle.vocab();
        for s in &corpus {
            let mut ctx: Vec<&str> = vec!["<s>"; order - 1];
            ctx.extend(s.iter().map(String::as_str));
            for end in (order - 1)..ctx.len() {
                let context = &ctx[end + 1 - order..end];
                for w in &vocab[..] {
                    if w == "<s>" {
                        continue;
                    }
                    let a = model.prob(context, w);
                    let b = oracle.prob(context, w);
                    prop_assert!((a - b).abs() <= 1e-9, "p({w} | {context:?}) = {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn unseen_words_score_as_unknown(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = random_corpus(&mut rng, &WORDS, 8, 6);
        let model = train_kn(&corpus, 2).unwrap();
        let oracle = KnOracle::train(&corpus, 2);
        let a = model.prob(&["zzz"], "yyy");
        prop_assert!((a - oracle.prob(&["zzz"], "yyy")).abs() <= 1e-9);
        prop_assert!((a - model.prob(&["<unk>"], "<unk>")).abs() <= 1e-15);
    }
}
