//! Token frequency tables loaded from two-column TSV files, for the corpus
//! frequency features (n-gram corpus counts, Simple/normal Wikipedia
//! relative frequency).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Additive constant keeping the relative frequency finite and monotone in
/// the counts when a token is missing from either table.
const RELATIVE_FREQ_ALPHA: f64 = 1.0;

/// Map from token to corpus count.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    counts: IndexMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    /// Load from `token<TAB>count` lines; `#` comments and blank lines are
    /// skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut counts = IndexMap::new();
        let mut total = 0u64;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = trimmed.split('\t');
            let (token, count) = match (cols.next(), cols.next(), cols.next()) {
                (Some(t), Some(c), None) => (t, c),
                _ => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        "expected exactly two tab-separated columns",
                    ))
                }
            };
            let count: u64 = count.trim().parse().map_err(|_| {
                Error::parse(path, lineno, format!("non-integer count {count:?}"))
            })?;
            *counts.entry(token.to_string()).or_insert(0) += count;
            total += count;
        }
        Ok(FrequencyTable { counts, total })
    }

    pub fn from_counts(entries: impl IntoIterator<Item = (String, u64)>) -> Self {
        let counts: IndexMap<String, u64> = entries.into_iter().collect();
        let total = counts.values().sum();
        FrequencyTable { counts, total }
    }

    /// Count for a token: exact probe, then lowercase.
    pub fn count(&self, token: &str) -> u64 {
        if let Some(&c) = self.counts.get(token) {
            return c;
        }
        let lower = token.to_lowercase();
        if lower != token {
            if let Some(&c) = self.counts.get(lower.as_str()) {
                return c;
            }
        }
        0
    }

    /// log10(count + 1); bounded and roughly uniform even for web-scale
    /// counts.
    pub fn log_count(&self, token: &str) -> f64 {
        ((self.count(token) + 1) as f64).log10()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Smoothed ratio of a token's count in the `simple` table to its count in
/// the `normal` table: `(c_simple + 1) / (c_normal + 1)`.
pub fn relative_frequency(simple: &FrequencyTable, normal: &FrequencyTable, token: &str) -> f64 {
    (simple.count(token) as f64 + RELATIVE_FREQ_ALPHA)
        / (normal.count(token) as f64 + RELATIVE_FREQ_ALPHA)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write as _;

    #[test]
    fn load_and_count() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"# counts\nthe\t1000\ncat\t42\n").unwrap();
        let t = FrequencyTable::load(f.path()).unwrap();
        assert_eq!(t.count("the"), 1000);
        assert_eq!(t.count("cat"), 42);
        assert_eq!(t.count("dog"), 0);
        assert_eq!(t.total(), 1042);
    }

    #[test]
    fn count_falls_back_to_lowercase() {
        let t = FrequencyTable::from_counts([("cat".into(), 7)]);
        assert_eq!(t.count("Cat"), 7);
    }

    #[test]
    fn relative_frequency_symmetric_counts() {
        let s = FrequencyTable::from_counts([("w".into(), 100)]);
        let n = FrequencyTable::from_counts([("w".into(), 100)]);
        assert_abs_diff_eq!(relative_frequency(&s, &n, "w"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_frequency_absent_token_is_one() {
        let s = FrequencyTable::default();
        let n = FrequencyTable::default();
        assert_abs_diff_eq!(relative_frequency(&s, &n, "zzqx"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_frequency_direct_arithmetic() {
        let s = FrequencyTable::from_counts([("w".into(), 10)]);
        let n = FrequencyTable::from_counts([("w".into(), 1000)]);
        assert_abs_diff_eq!(
            relative_frequency(&s, &n, "w"),
            11.0 / 1001.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn malformed_rows_are_rejected_with_line_numbers() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"ok\t1\nbad\tNaN\n").unwrap();
        assert!(matches!(
            FrequencyTable::load(f.path()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
