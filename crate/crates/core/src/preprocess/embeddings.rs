use std::collections::HashMap;
use std::path::Path;

use super::PreprocessError;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, PreprocessError> {
    let text = std::fs::read_to_string(path).map_err(|e| PreprocessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_embeddings(&text)
}

/// Parses word2vec text format. A first line consisting of exactly two
/// integers is treated as a `<count> <dim>` header. The first occurrence
/// of a duplicated token wins.
pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable, PreprocessError> {
    let mut dim: Option<usize> = None;
    let mut vectors = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                dim = Some(d);
                continue;
            }
        }
        let values = fields[1..]
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| PreprocessError::Embeddings {
                        line: line_no,
                        message: format!("non-numeric value `{v}`"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(PreprocessError::Embeddings {
                line: line_no,
                message: format!("expected {expected} values, found {}", values.len()),
            });
        }
        vectors.entry(fields[0].to_string()).or_insert(values);
    }
    Ok(EmbeddingTable {
        dim: dim.unwrap_or(0),
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headerless_table() {
        let t = parse_embeddings("cat 1 2 3\ndog 4 5 6\n").unwrap();
        assert_eq!((t.len(), t.dim), (2, 3));
        assert_eq!(t.get("dog"), Some(&[4.0, 5.0, 6.0][..]));
    }

    #[test]
    fn header_is_optional() {
        let with = parse_embeddings("2 3\ncat 1 2 3\ndog 4 5 6\n").unwrap();
        let without = parse_embeddings("cat 1 2 3\ndog 4 5 6\n").unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn wrong_arity_names_the_line() {
        let err = parse_embeddings("cat 1 2 3\ndog 4 5\n").unwrap_err();
        assert!(matches!(err, PreprocessError::Embeddings { line: 2, .. }));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn non_numeric_is_rejected() {
        let err = parse_embeddings("cat 1 x 3\n").unwrap_err();
        assert!(matches!(err, PreprocessError::Embeddings { line: 1, .. }));
    }

    #[test]
    fn first_duplicate_wins() {
        let t = parse_embeddings("cat 1 1\ncat 2 2\n").unwrap();
        assert_eq!(t.get("cat"), Some(&[1.0, 1.0][..]));
    }
}
