//! Trains a trigram Kneser-Ney model and scores a few sentences.
//!
//! cargo run --example kneser_ney_lm

use std::error::Error;
use std::fs;
use std::path::Path;

use featforge::lm::train_kn;
use featforge::preprocess::tokenize;

fn main() -> Result<(), Box<dyn Error>> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let corpus: Vec<Vec<String>> = fs::read_to_string(toy.join("lm.txt"))?
        .lines()
        .map(|l| tokenize(l, true))
        .collect();
    let model = train_kn(&corpus, 3)?;
    println!(
        "order {} with {} vocabulary entries",
        model.order(),
        model.vocab().len()
    );

    let mut next: Vec<(String, f64)> = model.distribution(&["it", "was"]);
    next.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("most likely after `it was`:");
    for (w, p) in next.iter().take(5) {
        println!("  {w:<12} {p:.4}");
    }

    println!(
        "{:<45} {:>9} {:>10} {:>9}",
        "sentence", "log10 p", "perplexity", "bits"
    );
    for text in [
        "The movie was really charming.",
        "What a bland script.",
        "Script the was bland what.",
        "I adored the popcorn!",
    ] {
        let tokens = tokenize(text, true);
        let [lp, ppl, bits] = model.sentence_scores(&tokens);
        println!("{text:<45} {lp:>9.3} {ppl:>10.3} {bits:>9.3}");
    }
    Ok(())
}
