//! Typed access to `key=value` argument strings.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::config::parse_key_values;

/// Arguments of one extractor or classifier request. Every key must be
/// consumed before [`Args::finish`], so typos surface as errors.
#[derive(Debug, Clone)]
pub struct Args {
    values: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Args {
    pub fn parse(text: &str) -> Result<Args, String> {
        Ok(Args::from_map(parse_key_values(text)?))
    }

    pub fn from_map(values: BTreeMap<String, String>) -> Args {
        Args {
            values,
            used: BTreeSet::new(),
        }
    }

    pub fn raw(&mut self, key: &str) -> Option<&str> {
        self.used.insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, String> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("invalid value `{v}` for `{key}`")),
        }
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, String> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list, e.g. `hidden=100,50`.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, String> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| format!("invalid list element `{p}` for `{key}`"))
                })
                .collect::<Result<Vec<T>, String>>()
                .map(Some),
        }
    }

    /// Fails if any supplied key was never read.
    pub fn finish(self) -> Result<(), String> {
        let unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(format!("unknown argument(s): {unknown:?}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typed_access_and_unknown_keys() {
        let mut a = Args::parse("n=2 level=pos hidden=100,50").unwrap();
        assert_eq!(a.get::<usize>("n").unwrap(), Some(2));
        assert_eq!(a.get_or("cutoff", 3usize).unwrap(), 3);
        assert_eq!(a.list::<usize>("hidden").unwrap(), Some(vec![100, 50]));
        let err = a.finish().unwrap_err();
        assert!(err.contains("level"));
    }

    #[test]
    fn bad_values() {
        let mut a = Args::parse("n=two").unwrap();
        assert!(a.get::<usize>("n").is_err());
        assert!(Args::parse("n").is_err());
    }
}
