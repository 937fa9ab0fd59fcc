use std::io::{self, Write};

use super::{number, Split};
use crate::sparse::FeatureDescriptor;

/// Single-quotes a name that would otherwise not be a bare ARFF token.
pub fn arff_quote(s: &str) -> String {
    let bare = !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && !matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'));
    if bare {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// Sparse-instance ARFF with a nominal `class` attribute after the
/// feature columns.
pub fn write_arff<W: Write>(
    w: &mut W,
    descriptor: &FeatureDescriptor,
    split: &Split,
    label_names: &[String],
) -> io::Result<()> {
    writeln!(w, "@RELATION featforge")?;
    writeln!(w)?;
    for name in &descriptor.column_names {
        writeln!(w, "@ATTRIBUTE {} NUMERIC", arff_quote(name))?;
    }
    let classes: Vec<String> = label_names.iter().map(|n| arff_quote(n)).collect();
    writeln!(w, "@ATTRIBUTE class {{{}}}", classes.join(","))?;
    writeln!(w)?;
    writeln!(w, "@DATA")?;
    let class_col = split.matrix.n_cols();
    for (r, &label) in split.labels.iter().enumerate() {
        let (cols, vals) = split.matrix.row(r);
        let mut items: Vec<String> = cols
            .iter()
            .zip(vals)
            .map(|(c, v)| format!("{c} {}", number(*v)))
            .collect();
        items.push(format!("{class_col} {}", classes[label]));
        writeln!(w, "{{{}}}", items.join(", "))?;
    }
    Ok(())
}
