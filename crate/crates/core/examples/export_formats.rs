//! Writes a small feature block as CSV, svmlight and ARFF, then reads the
//! svmlight file back.
//!
//! cargo run --example export_formats

use std::error::Error;
use std::fs;

use featforge::export::{export, read_svmlight_file, ExportFormat, ExportJob};
use featforge::{FeatureBlock, FeatureDescriptor, SparseMatrix};

fn main() -> Result<(), Box<dyn Error>> {
    let names = ["good", "bad", "not good"].map(String::from);
    let train =
        SparseMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 1.0), (2, 2, 1.0)])?;
    let test = SparseMatrix::from_triplets(1, 3, &[(0, 1, 0.5)])?;
    let block = FeatureBlock::new(2, train, test, FeatureDescriptor::new(2, "ngram", names))?;
    let labels = ["negative", "positive"].map(String::from);

    let dir = std::env::temp_dir().join("featforge-export-example");
    let written = export(&ExportJob {
        block: &block,
        train_labels: &[1, 0, 0],
        test_labels: &[0],
        label_names: &labels,
        formats: &ExportFormat::ALL,
        directory: &dir,
    })?;
    for path in &written {
        println!("== {}", path.display());
        print!("{}", fs::read_to_string(path)?);
    }

    let (back, back_labels) = read_svmlight_file(&dir.join("train.svm"), block.n_cols())?;
    println!(
        "round trip exact: {}",
        back == block.train && back_labels == [1, 0, 0]
    );
    Ok(())
}
