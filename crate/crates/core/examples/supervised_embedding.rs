//! Trains the supervised averaged-embedding classifier directly on tokens
//! and inspects its sentence representations.
//!
//! cargo run --release --example supervised_embedding

use std::error::Error;
use std::path::Path;

use featforge::classify::{accuracy, train_supervised_embedding, SupervisedEmbeddingOptions};
use featforge::preprocess::tokenize;
use featforge::Dataset;

fn main() -> Result<(), Box<dyn Error>> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let data = Dataset::load(
        &toy.join("train.txt"),
        &toy.join("train.labels"),
        &toy.join("test.txt"),
        &toy.join("test.labels"),
    )?;
    let tok = |s: &[String]| s.iter().map(|t| tokenize(t, true)).collect::<Vec<_>>();
    let (train, test) = (tok(&data.train_sentences), tok(&data.test_sentences));

    let opts = SupervisedEmbeddingOptions {
        epochs: 50,
        lr: 0.5,
        ..SupervisedEmbeddingOptions::default()
    };
    let model = train_supervised_embedding(&train, &data.train_labels, data.n_classes(), &opts)?;
    println!("{} words, {} dimensions", model.vocab_size(), model.dim());
    let acc = accuracy(&model.predict(&test), &data.test_labels)?;
    println!("test accuracy {acc:.4}");

    for (sentence, tokens) in data.test_sentences.iter().zip(&test).take(3) {
        let p = model.probabilities(tokens);
        let hidden: Vec<String> = model
            .hidden(tokens)
            .iter()
            .take(4)
            .map(|v| format!("{v:+.3}"))
            .collect();
        println!(
            "{sentence}\n  p = {p:.3?}  hidden[..4] = [{}]",
            hidden.join(", ")
        );
    }
    Ok(())
}
