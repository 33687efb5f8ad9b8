//! Line-oriented `key=value` text format shared by config files, linear
//! model files and MLP model files.
//!
//! One entry per line. Blank lines and lines starting with `#` are ignored.
//! Whitespace around keys and values is trimmed. Keys must be unique.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: Vec<(String, String, u64)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String, u64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Malformed {
                    line: line_no,
                    message: format!("expected key=value, got `{line}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Malformed {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            if entries.iter().any(|(k, _, _)| k == key) {
                return Err(Error::Malformed {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.push((key.to_string(), value.trim().to_string(), line_no));
        }
        Ok(Self { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> u64 {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map_or(0, |(_, _, l)| *l)
    }

    /// Parses `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Malformed {
                line: self.line_of(key),
                message: format!("cannot parse `{v}` for key `{key}`"),
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Invalid(format!("missing key `{key}`")))
    }

    /// Space-separated list of numbers.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get_str(key) else {
            return Ok(None);
        };
        v.split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Malformed {
                    line: self.line_of(key),
                    message: format!("cannot parse `{tok}` in key `{key}`"),
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn require_list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.get_list(key)?
            .ok_or_else(|| Error::Invalid(format!("missing key `{key}`")))
    }
}

/// Builds `key=value` text. Floats use Rust's shortest round-trip formatting.
#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(self.out, "# {text}");
        self
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.out, "{key}={value}");
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        let _ = writeln!(self.out, "{key}={}", fmt_num(value));
        self
    }

    pub fn nums(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(self.out, "{key}={}", joined.join(" "));
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Shortest decimal string that parses back to the identical `f64`.
///
/// Plain notation for ordinary magnitudes, exponent notation (`7.1705e-6`)
/// for very small or very large ones.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub(crate) fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Invalid(format!("{what} must be finite, got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# header\n\n a = 1.5 \nb=x y\n").unwrap();
        assert_eq!(kv.get::<f64>("a").unwrap(), Some(1.5));
        assert_eq!(kv.get_str("b"), Some("x y"));
        assert_eq!(kv.get::<f64>("missing").unwrap(), None);
    }

    #[test]
    fn duplicate_key_names_line() {
        let err = KeyValues::parse("a=1\na=2\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_equals_is_malformed() {
        assert!(KeyValues::parse("just words").is_err());
    }

    #[test]
    fn list_round_trip() {
        let mut w = KvWriter::new();
        w.nums("xs", &[0.1, -2.5e-7, 3.0]);
        let kv = KeyValues::parse(&w.finish()).unwrap();
        assert_eq!(kv.require_list::<f64>("xs").unwrap(), vec![0.1, -2.5e-7, 3.0]);
    }

    #[test]
    fn fmt_num_is_short_and_exact() {
        assert_eq!(fmt_num(99.762), "99.762");
        assert_eq!(fmt_num(7.1705e-6), "7.1705e-6");
        assert_eq!(fmt_num(25000.0), "25000");
        assert_eq!(fmt_num(0.0), "0");
        for x in [0.1 + 0.2, 1e-300, -3.5e20, f64::MIN_POSITIVE, 1.0 / 3.0] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
