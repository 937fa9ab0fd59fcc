//! Signed feature hashing of word bigrams into a small number of columns.
//!
//! cargo run --example hashed_ngrams

use featforge::hashing::{column_and_sign, hash_ngram};
use featforge::preprocess::tokenize;

fn main() {
    let dims = 16;
    let text = "The plot was dull, the ending was dull.";
    let tokens = tokenize(text, true);
    let mut row = vec![0.0; dims];
    for pair in tokens.windows(2) {
        let h = hash_ngram(pair);
        let (col, sign) = column_and_sign(h, dims);
        row[col] += sign;
        println!(
            "{:<18} {h:08x} -> column {col:>2} sign {sign:+}",
            pair.join(" ")
        );
    }
    println!("hashed row ({dims} dims): {row:?}");
}
