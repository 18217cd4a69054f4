//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, keys are lowercase
//! identifiers. Command-line `--set key=value` overrides replace file
//! entries, and every experiment resolves the result against its own key
//! table so typos are rejected instead of silently ignored.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::grid::GridSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("override `{0}`: expected key=value")]
    Override(String),
    #[error("unknown key `{key}` for {experiment}")]
    UnknownKey { experiment: String, key: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
    #[error("grid `{spec}`: {reason}")]
    Grid { spec: String, reason: String },
}

fn valid_key(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn split_entry(text: &str) -> Result<(String, String), String> {
    let (k, v) = text.split_once('=').ok_or("expected key = value")?;
    let (k, v) = (k.trim(), v.trim());
    if !valid_key(k) {
        return Err(format!("invalid key `{k}`"));
    }
    if v.is_empty() {
        return Err(format!("empty value for `{k}`"));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Unresolved entries from a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split_once('#').map_or(line, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = split_entry(body).map_err(|reason| ConfigError::Syntax { line: line_no, reason })?;
            if entries.contains_key(&k) {
                return Err(ConfigError::Duplicate { line: line_no, key: k });
            }
            entries.insert(k, v);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Applies `key=value` overrides in order; later ones win.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for o in overrides {
            let (k, v) = parse_override(o.as_ref())?;
            self.entries.insert(k, v);
        }
        Ok(())
    }
}

pub fn parse_override(text: &str) -> Result<(String, String), ConfigError> {
    if text.contains(['\n', '#']) {
        return Err(ConfigError::Override(text.to_string()));
    }
    split_entry(text).map_err(|_| ConfigError::Override(text.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fallback {
    Value(&'static str),
    Required,
    Optional,
}

/// One accepted key and what happens when it is absent.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub fallback: Fallback,
}

pub const fn key(key: &'static str, default: &'static str) -> KeySpec {
    KeySpec { key, fallback: Fallback::Value(default) }
}

pub const fn required(key: &'static str) -> KeySpec {
    KeySpec { key, fallback: Fallback::Required }
}

pub const fn optional(key: &'static str) -> KeySpec {
    KeySpec { key, fallback: Fallback::Optional }
}

/// Every accepted key of one experiment with its effective value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    values: BTreeMap<String, String>,
}

impl ResolvedConfig {
    pub fn resolve(experiment: &str, raw: &RawConfig, specs: &[KeySpec]) -> Result<Self, ConfigError> {
        for k in raw.keys() {
            if k != "experiment" && !specs.iter().any(|s| s.key == k) {
                return Err(ConfigError::UnknownKey { experiment: experiment.to_string(), key: k.to_string() });
            }
        }
        if let Some(e) = raw.get("experiment") {
            if e != experiment {
                return Err(ConfigError::Value {
                    key: "experiment".into(),
                    reason: format!("config is for `{e}`, command asked for `{experiment}`"),
                });
            }
        }
        let mut values = BTreeMap::new();
        values.insert("experiment".to_string(), experiment.to_string());
        for s in specs {
            let v = match (raw.get(s.key), s.fallback) {
                (Some(v), _) | (None, Fallback::Value(v)) => v,
                (None, Fallback::Optional) => continue,
                (None, Fallback::Required) => return Err(ConfigError::Missing(s.key.to_string())),
            };
            values.insert(s.key.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<&str, ConfigError> {
        self.values.get(key).map(String::as_str).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.str(key)?;
        v.parse().map_err(|e| ConfigError::Value { key: key.to_string(), reason: format!("`{v}`: {e}") })
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.parsed(key)?;
        if !v.is_finite() {
            return Err(ConfigError::Value { key: key.to_string(), reason: "must be finite".into() });
        }
        Ok(v)
    }

    pub fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.f64(key)?;
        if !(v > 0.0) {
            return Err(ConfigError::Value { key: key.to_string(), reason: format!("must be positive, got {v}") });
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.parsed(key)
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.parsed(key)
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.parsed::<GridSpec>(key)?.points()
    }
}
