//! Runs the complete toy experiment from its config file: extraction,
//! export, every classifier, and the run report.
//!
//! cargo run --release --example full_pipeline

use std::error::Error;
use std::path::Path;

use featforge::controller;

fn main() -> Result<(), Box<dyn Error>> {
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let mut cfg = featforge::load_config(&toy.join("config.ini"))?;
    cfg.resolve_relative_to(&toy);
    cfg.output.directory = std::env::temp_dir().join("featforge-toy-run");
    controller::init_logging(cfg.settings.log_level);
    let report = controller::run_config(&cfg)?;
    print!("{}", report.to_text());
    println!("report written to {}", cfg.output.directory.display());
    Ok(())
}
