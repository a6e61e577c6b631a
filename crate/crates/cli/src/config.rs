//! Flat key-value configuration with dotted sections.
//!
//! ```text
//! # comment
//! protocol.epochs = 100
//! data.dist = normal
//! sweep.values = 25,50,100,200
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("line {}: expected `key = value`", no + 1)));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(err(format!("line {}: empty key", no + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(err(format!("line {}: duplicate key {key}", no + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or_else(|| err(format!("missing required key {key}")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => {
                v.parse().map_err(|_| err(format!("key {key}: cannot parse {v:?}")))
            }
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.parsed(key, default)
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.parsed(key, default)
    }

    pub fn u32(&self, key: &str, default: u32) -> Result<u32, ConfigError> {
        self.parsed(key, default)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.parsed(key, default)
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(err(format!("key {key}: expected a boolean, found {v:?}"))),
        }
    }

    /// Comma-separated list values, e.g. `sweep.values = 25,50,100`.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|_| err(format!("key {key}: cannot parse element {item:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_lists() {
        let cfg = Config::parse(
            "# experiment\nprotocol.epochs = 100\ndata.dist = normal\nsweep.values = 1, 2,3\n",
        )
        .unwrap();
        assert_eq!(cfg.usize("protocol.epochs", 0).unwrap(), 100);
        assert_eq!(cfg.string("data.dist", "x"), "normal");
        assert_eq!(cfg.list::<usize>("sweep.values").unwrap().unwrap(), vec![1, 2, 3]);
        assert_eq!(cfg.usize("absent", 7).unwrap(), 7);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("key value\n").is_err());
        assert!(Config::parse("a = 1\na = 2\n").is_err());
        let cfg = Config::parse("x = notanumber\n").unwrap();
        assert!(cfg.usize("x", 1).is_err());
    }
}
