//! Tokenizes raw sentences and tags them with a perceptron tagger trained
//! on the bundled tagged corpus.
//!
//! cargo run --example tokenize_and_tag

use std::error::Error;
use std::fs;
use std::path::Path;

use featforge::preprocess::{parse_tagged_line, tokenize, train_tagger};

fn main() -> Result<(), Box<dyn Error>> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let corpus = fs::read_to_string(toy.join("tagged.txt"))?
        .lines()
        .enumerate()
        .map(|(i, line)| parse_tagged_line(line, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    let tagger = train_tagger(&corpus, 5, 42)?;
    println!("tagset: {}", tagger.tagset().join(" "));

    for text in fs::read_to_string(toy.join("test.txt"))?.lines().take(4) {
        let tokens = tokenize(text, false);
        let tags = tagger.tag(&tokens);
        let tagged: Vec<String> = tokens
            .iter()
            .zip(&tags)
            .map(|(t, g)| format!("{t}/{g}"))
            .collect();
        println!("{text}\n  {}", tagged.join(" "));
    }
    Ok(())
}
