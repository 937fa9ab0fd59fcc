//! Cross-validated grid search over C for the one-vs-rest linear SVM on a
//! synthetic three-class problem.
//!
//! cargo run --release --example svm_grid_search

use featforge::classify::svm::{default_c_grid, grid_search_c, SvmOptions};
use featforge::classify::{accuracy, predict};
use featforge::SparseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(n: usize, rng: &mut ChaCha8Rng) -> (SparseMatrix, Vec<usize>) {
    let centers = [[2.0, 0.0], [-1.0, 1.7], [-1.0, -1.7]];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % 3;
        rows.push(
            centers[k]
                .iter()
                .map(|c| c + rng.gen_range(-1.2..1.2))
                .collect(),
        );
        labels.push(k);
    }
    (SparseMatrix::from_dense(2, &rows), labels)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (train, train_y) = blobs(300, &mut rng);
    let (test, test_y) = blobs(150, &mut rng);

    let grid = default_c_grid();
    let result = grid_search_c(&train, &train_y, 3, &grid, 3, &SvmOptions::default())?;
    for (c, score) in result.grid.iter().zip(&result.scores) {
        let mark = if *c == result.best_c { " <- best" } else { "" };
        println!("C = {c:>9.5}  cv accuracy {score:.4}{mark}");
    }
    let acc = accuracy(&predict(&result.model, &test)?, &test_y)?;
    println!("held-out accuracy: {acc:.4}");
    Ok(())
}
