use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use super::{number, ExportError};
use crate::sparse::SparseMatrix;

/// One line per row: `<label id + 1> <col + 1>:<value> ...`.
pub fn write_svmlight<W: Write>(w: &mut W, m: &SparseMatrix, labels: &[usize]) -> io::Result<()> {
    for (r, &label) in labels.iter().enumerate() {
        write!(w, "{}", label + 1)?;
        let (cols, vals) = m.row(r);
        for (c, v) in cols.iter().zip(vals) {
            write!(w, " {}:{}", c + 1, number(*v))?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses svmlight text into a matrix and 0-based label ids. The matrix
/// has `max(n_cols_hint, largest index)` columns.
pub fn read_svmlight<R: BufRead>(
    reader: R,
    n_cols_hint: usize,
) -> Result<(SparseMatrix, Vec<usize>), ExportError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut n_cols = n_cols_hint;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let bad = |message: String| ExportError::Svmlight {
            line: line_no,
            message,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let mut parts = line.split_whitespace();
        let Some(label) = parts.next() else {
            return Err(bad("missing label".into()));
        };
        let label: usize = label
            .parse()
            .ok()
            .filter(|&l| l >= 1)
            .ok_or_else(|| bad(format!("invalid label `{label}`")))?;
        labels.push(label - 1);
        let mut row = Vec::new();
        let mut last = 0;
        for pair in parts {
            let (idx, val) = pair
                .split_once(':')
                .ok_or_else(|| bad(format!("malformed pair `{pair}`")))?;
            let idx: usize = idx
                .parse()
                .ok()
                .filter(|&c| c >= 1)
                .ok_or_else(|| bad(format!("invalid index in `{pair}`")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| bad(format!("invalid value in `{pair}`")))?;
            if idx <= last {
                return Err(bad(format!("index {idx} not ascending")));
            }
            last = idx;
            n_cols = n_cols.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
    }
    let m = SparseMatrix::from_rows(n_cols, rows).map_err(|e| ExportError::Svmlight {
        line: 0,
        message: e.to_string(),
    })?;
    Ok((m, labels))
}

pub fn read_svmlight_file(
    path: &Path,
    n_cols_hint: usize,
) -> Result<(SparseMatrix, Vec<usize>), ExportError> {
    let file = std::fs::File::open(path).map_err(|source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_svmlight(BufReader::new(file), n_cols_hint)
}
