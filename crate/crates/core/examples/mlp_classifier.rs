//! Trains the multilayer perceptron and logistic regression on n-gram
//! features of the toy data and compares them.
//!
//! cargo run --release --example mlp_classifier

use std::error::Error;
use std::path::Path;

use featforge::classify::{accuracy, predict, train_logreg, train_mlp, LogRegOptions, MlpOptions};
use featforge::features::extract_all;
use featforge::{load_config, Dataset};

fn main() -> Result<(), Box<dyn Error>> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let mut cfg = load_config(&toy.join("config.ini"))?;
    cfg.resolve_relative_to(&toy);
    cfg.feature_requests.retain(|r| r.feature_id == 2);
    let i = &cfg.input;
    let data = Dataset::load(&i.train_text, &i.train_labels, &i.test_text, &i.test_labels)?;
    let block = extract_all(&cfg, &data)?.block;
    let k = data.n_classes();

    for (name, opts) in [
        (
            "mlp 100",
            MlpOptions {
                epochs: 40,
                ..MlpOptions::preset_100()
            },
        ),
        (
            "mlp 100-50",
            MlpOptions {
                epochs: 40,
                ..MlpOptions::preset_100_50()
            },
        ),
    ] {
        let model = train_mlp(&block.train, &data.train_labels, k, &opts)?;
        let acc = accuracy(&predict(&model, &block.test)?, &data.test_labels)?;
        println!("{name:<12} test accuracy {acc:.4}");
    }
    let model = train_logreg(
        &block.train,
        &data.train_labels,
        k,
        &LogRegOptions::default(),
    )?;
    let acc = accuracy(&predict(&model, &block.test)?, &data.test_labels)?;
    println!("{:<12} test accuracy {acc:.4}", "logreg");
    Ok(())
}
