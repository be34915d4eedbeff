//! `key = value` configuration files. Command-line flags take precedence.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct KvConfig {
    values: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
}

impl KvConfig {
    /// One `key = value` per line; `#` starts a comment line. Keys are
    /// case-sensitive and may not repeat. Values run to the end of the line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            if let Some((_, first)) = values.insert(k.to_owned(), (v.to_owned(), i + 1)) {
                return Err(Error::Config(format!(
                    "line {}: {k} already set on line {first}",
                    i + 1
                )));
            }
        }
        Ok(KvConfig {
            values,
            used: RefCell::default(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text)
    }

    /// Empty configuration when `path` is `None`.
    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key)?;
        self.used.borrow_mut().insert(key.to_owned());
        Some(v.0.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let line = self.values[key].1;
        v.parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = {v:?}")))
    }

    /// Flag if given, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => {
                // still validate the file entry so typos surface
                self.get::<T>(key)?;
                v
            }
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        let file = self.get(key)?;
        Ok(flag.or(file))
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        let file = self.get::<bool>(key)?;
        Ok(flag || file.unwrap_or(false))
    }

    /// Keys never read; typically typos.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.values
            .keys()
            .filter(|k| !used.contains(*k))
            .cloned()
            .collect()
    }

    /// Every entry, for run manifests.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect()
    }
}

/// `lo..hi` (step 0.1), `lo..hi:step`, or a comma-separated list.
pub fn parse_fractions(s: &str) -> Result<Vec<f64>> {
    let bad = || {
        Error::Config(format!(
            "fractions {s:?}: expected lo..hi[:step] or a comma list"
        ))
    };
    let s = s.trim();
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "0.1"));
        let (lo, hi, step): (f64, f64, f64) = (
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        // integer stepping so 0.1..1.0 yields exactly ten values
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| round12(lo + step * k as f64)).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Comma-separated list of `T`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| Error::Config(format!("cannot parse list item {x:?}")))
        })
        .collect()
}
