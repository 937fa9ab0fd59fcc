//! Compressed-sparse-row matrices, feature descriptors and feature blocks.
//!
//! Every extractor returns a [`FeatureBlock`]: one train matrix, one test
//! matrix sharing a column space, and a descriptor naming each column.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SparseError {
    #[error("entry ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    OutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("row index {index} out of range for a matrix with {n_rows} rows")]
    RowOutOfRange { index: usize, n_rows: usize },
    #[error(
        "cannot merge feature {feature_id}: {split} matrix has {found} rows, expected {expected}"
    )]
    RowMismatch {
        feature_id: u32,
        split: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("feature {feature_id}: descriptor has {names} names but matrices have {cols} columns")]
    DescriptorMismatch {
        feature_id: u32,
        names: usize,
        cols: usize,
    },
    #[error("cannot merge an empty list of blocks")]
    NoBlocks,
}

/// Row-major CSR matrix of `f64` values with no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// An all-zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that end up zero are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(row, col, _) in entries {
            if row >= n_rows || col >= n_cols {
                return Err(SparseError::OutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        // Stable so that duplicates are summed in input order.
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut builder = CsrBuilder::new(n_cols);
        let mut current_row = 0;
        let mut i = 0;
        while i < sorted.len() {
            let (row, col, mut sum) = sorted[i];
            i += 1;
            while i < sorted.len() && sorted[i].0 == row && sorted[i].1 == col {
                sum += sorted[i].2;
                i += 1;
            }
            while current_row < row {
                builder.finish_row();
                current_row += 1;
            }
            builder.push(col, sum);
        }
        while current_row < n_rows {
            builder.finish_row();
            current_row += 1;
        }
        Ok(builder.build())
    }

    /// Builds a matrix from per-row `(col, value)` lists. Each row is sorted
    /// and duplicate columns are summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self, SparseError> {
        let n_rows = rows.len();
        let mut builder = CsrBuilder::new(n_cols);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let (col, mut sum) = row[i];
                if col >= n_cols {
                    return Err(SparseError::OutOfRange {
                        row: r,
                        col,
                        n_rows,
                        n_cols,
                    });
                }
                i += 1;
                while i < row.len() && row[i].0 == col {
                    sum += row[i].1;
                    i += 1;
                }
                builder.push(col, sum);
            }
            builder.finish_row();
        }
        Ok(builder.build())
    }

    /// Builds a matrix from dense rows, skipping zeros.
    pub fn from_dense(n_cols: usize, rows: &[Vec<f64>]) -> Self {
        let mut builder = CsrBuilder::new(n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "dense row has wrong width");
            for (c, &v) in row.iter().enumerate() {
                builder.push(c, v);
            }
            builder.finish_row();
        }
        builder.build()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (start, end) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[start..end], &self.values[start..end])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[usize], &[f64])> + '_ {
        (0..self.n_rows).map(move |r| self.row(r))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(i) => vals[i],
            Err(_) => 0.0,
        }
    }

    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        let (cols, vals) = self.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            out[c] = v;
        }
        out
    }

    /// Re-emits the stored entries as triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            out.extend(cols.iter().zip(vals).map(|(&c, &v)| (r, c, v)));
        }
        out
    }

    /// Sparse row times dense vector.
    pub fn row_dot(&self, r: usize, dense: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter().zip(vals).map(|(&c, &v)| v * dense[c]).sum()
    }

    pub fn row_sq_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum()
    }

    /// Selects `rows` in the given order.
    pub fn row_slice(&self, rows: &[usize]) -> Result<SparseMatrix, SparseError> {
        let mut builder = CsrBuilder::new(self.n_cols);
        for &r in rows {
            if r >= self.n_rows {
                return Err(SparseError::RowOutOfRange {
                    index: r,
                    n_rows: self.n_rows,
                });
            }
            let (cols, vals) = self.row(r);
            builder.extend_row(cols, vals);
            builder.finish_row();
        }
        Ok(builder.build())
    }

    /// Column-wise concatenation of matrices with equal row counts.
    fn hstack_matrices(parts: &[&SparseMatrix]) -> SparseMatrix {
        let n_rows = parts.first().map_or(0, |m| m.n_rows);
        let n_cols = parts.iter().map(|m| m.n_cols).sum();
        let nnz = parts.iter().map(|m| m.nnz()).sum();
        let mut builder = CsrBuilder::with_capacity(n_cols, n_rows, nnz);
        for r in 0..n_rows {
            let mut offset = 0;
            for m in parts {
                let (cols, vals) = m.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    builder.push(c + offset, v);
                }
                offset += m.n_cols;
            }
            builder.finish_row();
        }
        builder.build()
    }

    /// Checks the CSR invariants. Used by tests and debug assertions.
    pub fn check_invariants(&self) -> bool {
        self.row_offsets.len() == self.n_rows + 1
            && self.row_offsets[0] == 0
            && self.row_offsets.windows(2).all(|w| w[0] <= w[1])
            && *self.row_offsets.last().unwrap() == self.col_indices.len()
            && self.col_indices.len() == self.values.len()
            && self.values.iter().all(|&v| v != 0.0)
            && (0..self.n_rows).all(|r| {
                let cols = self.row(r).0;
                cols.windows(2).all(|w| w[0] < w[1]) && cols.iter().all(|&c| c < self.n_cols)
            })
    }
}

/// Incremental row-by-row CSR construction. Callers push columns in
/// ascending order within a row; zeros are skipped.
pub(crate) struct CsrBuilder {
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrBuilder {
    pub(crate) fn new(n_cols: usize) -> Self {
        Self::with_capacity(n_cols, 0, 0)
    }

    pub(crate) fn with_capacity(n_cols: usize, rows: usize, nnz: usize) -> Self {
        let mut row_offsets = Vec::with_capacity(rows + 1);
        row_offsets.push(0);
        CsrBuilder {
            n_cols,
            row_offsets,
            col_indices: Vec::with_capacity(nnz),
            values: Vec::with_capacity(nnz),
        }
    }

    pub(crate) fn push(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.n_cols);
        if value != 0.0 {
            self.col_indices.push(col);
            self.values.push(value);
        }
    }

    fn extend_row(&mut self, cols: &[usize], vals: &[f64]) {
        self.col_indices.extend_from_slice(cols);
        self.values.extend_from_slice(vals);
    }

    pub(crate) fn finish_row(&mut self) {
        self.row_offsets.push(self.col_indices.len());
    }

    pub(crate) fn build(self) -> SparseMatrix {
        SparseMatrix {
            n_rows: self.row_offsets.len() - 1,
            n_cols: self.n_cols,
            row_offsets: self.row_offsets,
            col_indices: self.col_indices,
            values: self.values,
        }
    }
}

/// Column names of a feature block, with the id of the extractor that
/// produced each column. Names follow `<extractor-name>:<item>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureDescriptor {
    pub column_names: Vec<String>,
    pub source_feature_ids: Vec<u32>,
}

impl FeatureDescriptor {
    pub fn new(feature_id: u32, prefix: &str, items: impl IntoIterator<Item = String>) -> Self {
        let column_names: Vec<String> = items
            .into_iter()
            .map(|item| format!("{prefix}:{item}"))
            .collect();
        let source_feature_ids = vec![feature_id; column_names.len()];
        FeatureDescriptor {
            column_names,
            source_feature_ids,
        }
    }

    pub fn len(&self) -> usize {
        self.column_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.column_names.is_empty()
    }
}

/// The train/test matrix pair returned by one extractor run.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub train: SparseMatrix,
    pub test: SparseMatrix,
    pub descriptor: FeatureDescriptor,
    pub feature_id: u32,
}

impl FeatureBlock {
    pub fn new(
        feature_id: u32,
        train: SparseMatrix,
        test: SparseMatrix,
        descriptor: FeatureDescriptor,
    ) -> Result<Self, SparseError> {
        for cols in [train.n_cols(), test.n_cols()] {
            if cols != descriptor.len() {
                return Err(SparseError::DescriptorMismatch {
                    feature_id,
                    names: descriptor.len(),
                    cols,
                });
            }
        }
        Ok(FeatureBlock {
            train,
            test,
            descriptor,
            feature_id,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.descriptor.len()
    }
}

/// Concatenates blocks column-wise in the given order. The merged block
/// takes the feature id of the first block.
pub fn hstack(blocks: &[FeatureBlock]) -> Result<FeatureBlock, SparseError> {
    let first = blocks.first().ok_or(SparseError::NoBlocks)?;
    if blocks.len() == 1 {
        return Ok(first.clone());
    }
    let (train_rows, test_rows) = (first.train.n_rows(), first.test.n_rows());
    for b in blocks {
        if b.train.n_rows() != train_rows {
            return Err(SparseError::RowMismatch {
                feature_id: b.feature_id,
                split: "train",
                expected: train_rows,
                found: b.train.n_rows(),
            });
        }
        if b.test.n_rows() != test_rows {
            return Err(SparseError::RowMismatch {
                feature_id: b.feature_id,
                split: "test",
                expected: test_rows,
                found: b.test.n_rows(),
            });
        }
    }
    let train = SparseMatrix::hstack_matrices(&blocks.iter().map(|b| &b.train).collect::<Vec<_>>());
    let test = SparseMatrix::hstack_matrices(&blocks.iter().map(|b| &b.test).collect::<Vec<_>>());
    let mut descriptor = FeatureDescriptor::default();
    for b in blocks {
        descriptor
            .column_names
            .extend(b.descriptor.column_names.iter().cloned());
        descriptor
            .source_feature_ids
            .extend(b.descriptor.source_feature_ids.iter().copied());
    }
    Ok(FeatureBlock {
        train,
        test,
        descriptor,
        feature_id: first.feature_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block(id: u32, train_rows: usize, test_rows: usize, cols: usize) -> FeatureBlock {
        let train = SparseMatrix::from_triplets(
            train_rows,
            cols,
            &(0..train_rows)
                .map(|r| (r, r % cols, (r + 1) as f64))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let test = SparseMatrix::zeros(test_rows, cols);
        let names = (0..cols).map(|c| c.to_string());
        FeatureBlock::new(id, train, test, FeatureDescriptor::new(id, "f", names)).unwrap()
    }

    #[test]
    fn triplets_identity_layout() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(m.row_offsets(), &[0, 1, 2]);
        assert_eq!(m.col_indices(), &[0, 1]);
        assert_eq!(m.values(), &[1.0, 2.0]);
    }

    #[test]
    fn triplets_cancel_to_empty() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, -1.0)]).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.row_offsets(), &[0, 0, 0]);
    }

    #[test]
    fn triplets_sorted_within_row() {
        let m = SparseMatrix::from_triplets(1, 3, &[(0, 2, 5.0), (0, 0, 3.0)]).unwrap();
        assert_eq!(m.col_indices(), &[0, 2]);
        assert_eq!(m.values(), &[3.0, 5.0]);
    }

    #[test]
    fn triplets_out_of_range() {
        let err = SparseMatrix::from_triplets(1, 1, &[(0, 1, 1.0)]).unwrap_err();
        assert!(matches!(err, SparseError::OutOfRange { col: 1, .. }));
    }

    #[test]
    fn hstack_dimensions() {
        let merged = hstack(&[block(1, 2, 1, 2), block(2, 2, 1, 3)]).unwrap();
        assert_eq!((merged.train.n_rows(), merged.train.n_cols()), (2, 5));
        assert_eq!(merged.descriptor.len(), 5);
        assert_eq!(merged.descriptor.source_feature_ids, vec![1, 1, 2, 2, 2]);
        assert_eq!(merged.train.get(1, 3), 2.0);
    }

    #[test]
    fn hstack_single_is_identity() {
        let b = block(4, 3, 2, 2);
        assert_eq!(hstack(std::slice::from_ref(&b)).unwrap(), b);
    }

    #[test]
    fn hstack_row_mismatch_names_feature() {
        let err = hstack(&[block(1, 2, 1, 2), block(7, 3, 1, 1)]).unwrap_err();
        assert!(matches!(
            err,
            SparseError::RowMismatch { feature_id: 7, .. }
        ));
        assert!(err.to_string().contains("feature 7"));
    }

    #[test]
    fn row_slice_cases() {
        let m = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (1, 2, 4.0)]).unwrap();
        assert_eq!(m.row_slice(&[0, 1]).unwrap(), m);
        let empty = m.row_slice(&[]).unwrap();
        assert_eq!((empty.n_rows(), empty.n_cols()), (0, 3));
        let swapped = m.row_slice(&[1, 0]).unwrap();
        assert_eq!(swapped.dense_row(0), vec![0.0, 0.0, 4.0]);
        assert_eq!(swapped.dense_row(1), vec![1.0, 0.0, 0.0]);
        assert!(m.row_slice(&[2]).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = SparseMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(rows, cols)| {
            prop::collection::vec((0..rows, 0..cols, -3i32..4), 0..20).prop_map(move |entries| {
                let t: Vec<_> = entries
                    .into_iter()
                    .map(|(r, c, v)| (r, c, v as f64 * 0.5))
                    .collect();
                SparseMatrix::from_triplets(rows, cols, &t).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn triplet_round_trip(m in arb_matrix()) {
            prop_assert!(m.check_invariants());
            let rebuilt = SparseMatrix::from_triplets(m.n_rows(), m.n_cols(), &m.triplets()).unwrap();
            prop_assert_eq!(rebuilt, m);
        }

        #[test]
        fn hstack_associative(a in arb_matrix(), b in arb_matrix(), c in arb_matrix()) {
            let rows = a.n_rows();
            let fit = |m: &SparseMatrix, id: u32| {
                let t: Vec<_> = m.triplets().into_iter().filter(|e| e.0 < rows).collect();
                let train = SparseMatrix::from_triplets(rows, m.n_cols(), &t).unwrap();
                let names = (0..m.n_cols()).map(|i| i.to_string());
                FeatureBlock::new(id, train, SparseMatrix::zeros(0, m.n_cols()),
                    FeatureDescriptor::new(id, "x", names)).unwrap()
            };
            let (ba, bb, bc) = (fit(&a, 1), fit(&b, 2), fit(&c, 3));
            let flat = hstack(&[ba.clone(), bb.clone(), bc.clone()]).unwrap();
            let nested = hstack(&[hstack(&[ba, bb]).unwrap(), bc]).unwrap();
            prop_assert_eq!(flat.train, nested.train);
            prop_assert_eq!(flat.descriptor, nested.descriptor);
        }

        #[test]
        fn identity_slice(m in arb_matrix()) {
            let all: Vec<usize> = (0..m.n_rows()).collect();
            prop_assert_eq!(m.row_slice(&all).unwrap(), m);
        }
    }
}
