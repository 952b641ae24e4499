//! Plain-text experiment configs: `key = value` lines, `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const KNOWN_KEYS: &[&str] = &[
    "space",
    "nodes",
    "nodes2",
    "radius",
    "r1",
    "r2",
    "modes",
    "tol",
    "t_min",
    "t",
    "t_grid",
    "level",
    "level_grid",
    "law",
    "frame",
    "eps",
    "r",
    "pairs",
    "alignment",
    "points",
    "sample",
    "knn",
    "epsilon",
    "bandwidth",
    "alpha",
    "distance",
    "duplicates",
    "calibration",
    "dim",
    "seed",
    "out",
];

/// Prefix of the keys describing a second model (for image comparisons).
pub const COMPARE_PREFIX: &str = "compare.";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bare = k.strip_prefix(COMPARE_PREFIX).unwrap_or(k);
            if !KNOWN_KEYS.contains(&bare) {
                return Err(Error::Config(format!("line {}: unknown key '{k}'", lineno + 1)));
            }
            if v.is_empty() {
                return Err(Error::Config(format!("line {}: empty value for '{k}'", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        if entries.is_empty() {
            return Err(Error::Config("config has no entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("cannot parse '{key}' value '{v}'")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// A positive real, defaulting when absent.
    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get_or(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("'{key}' must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v: usize = self.get_or(key, default)?;
        if v == 0 {
            return Err(Error::Config(format!("'{key}' must be positive")));
        }
        Ok(v)
    }

    /// `a,b,c` or `log:lo:hi:count`.
    pub fn real_grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let bad = || Error::Config(format!("cannot parse grid '{key}' = '{v}'"));
        let grid: Vec<f64> = if let Some(spec) = v.strip_prefix("log:") {
            let parts: Vec<&str> = spec.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            if !(lo > 0.0 && hi >= lo) || n == 0 {
                return Err(bad());
            }
            if n == 1 {
                vec![lo]
            } else {
                (0..n)
                    .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
                    .collect()
            }
        } else {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Config(format!("grid '{key}' must hold positive values")));
        }
        Ok(Some(grid))
    }

    /// `a,b,c` or `lo..hi` (inclusive).
    pub fn index_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let bad = || Error::Config(format!("cannot parse index list '{key}' = '{v}'"));
        let list: Vec<usize> = if let Some((a, b)) = v.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            (a..=b).collect()
        } else {
            v.split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        if list.is_empty() {
            return Err(bad());
        }
        Ok(Some(list))
    }

    /// Keys under [`COMPARE_PREFIX`], stripped, if any are present.
    pub fn compare_section(&self) -> Option<Config> {
        let entries: BTreeMap<String, String> = self
            .entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(COMPARE_PREFIX).map(|s| (s.to_string(), v.clone())))
            .collect();
        if entries.is_empty() {
            None
        } else {
            let mut c = Config { entries };
            if let (false, Some(seed)) = (c.has("seed"), self.raw("seed")) {
                c.set("seed", seed);
            }
            Some(c)
        }
    }

    /// SHA-256 over the sorted `key=value` lines, first 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            let _ = write!(out, "{b:02x}");
        }
        out
    }
}
