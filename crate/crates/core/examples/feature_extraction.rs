//! Builds individual extractors from the registry and runs the two-phase
//! protocol over the toy data without training anything.
//!
//! cargo run --example feature_extraction

use std::error::Error;
use std::path::Path;

use featforge::features::{extract_all, registry};
use featforge::{load_config, Dataset};

fn main() -> Result<(), Box<dyn Error>> {
    println!("registered extractors:");
    for e in registry() {
        println!("  {} {}", e.id, e.name);
    }

    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let mut cfg = load_config(&toy.join("config.ini"))?;
    cfg.resolve_relative_to(&toy);
    let i = &cfg.input;
    let data = Dataset::load(&i.train_text, &i.train_labels, &i.test_text, &i.test_labels)?;

    let extraction = extract_all(&cfg, &data)?;
    for t in &extraction.timings {
        println!(
            "{:<22} {:<28} train {:?} test {:?}",
            t.name, t.args, t.train_shape, t.test_shape
        );
    }
    let block = &extraction.block;
    println!(
        "merged: {} columns, {} stored training values",
        block.n_cols(),
        block.train.nnz()
    );
    println!("first sentence: {}", data.train_sentences[0]);
    let (cols, vals) = block.train.row(0);
    for (&c, &v) in cols.iter().zip(vals).take(12) {
        println!("  {:<34} {v}", block.descriptor.column_names[c]);
    }
    Ok(())
}
