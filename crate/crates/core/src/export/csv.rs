use std::io::{self, Write};

use super::{number, Split};
use crate::sparse::FeatureDescriptor;

/// Quotes a field if it contains a comma, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header `label,<column names>`, then one dense row per sentence with the
/// label written by name.
pub fn write_csv<W: Write>(
    w: &mut W,
    descriptor: &FeatureDescriptor,
    split: &Split,
    label_names: &[String],
) -> io::Result<()> {
    w.write_all(b"label")?;
    for name in &descriptor.column_names {
        write!(w, ",{}", csv_field(name))?;
    }
    w.write_all(b"\n")?;
    let n_cols = split.matrix.n_cols();
    for (r, &label) in split.labels.iter().enumerate() {
        w.write_all(csv_field(&label_names[label]).as_bytes())?;
        let (cols, vals) = split.matrix.row(r);
        let mut next = 0;
        for c in 0..n_cols {
            if next < cols.len() && cols[next] == c {
                write!(w, ",{}", number(vals[next]))?;
                next += 1;
            } else {
                w.write_all(b",0")?;
            }
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    #[test]
    fn quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn single_row() {
        let m = SparseMatrix::from_dense(2, &[vec![0.0, 2.5]]);
        let d = FeatureDescriptor::new(1, "f", ["a,b".into(), "c".into()]);
        let split = Split {
            name: "train",
            matrix: &m,
            labels: &[0],
        };
        let mut out = Vec::new();
        write_csv(&mut out, &d, &split, &["pos".into()]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "label,\"f:a,b\",f:c\npos,0,2.5\n"
        );
    }
}
