//! Merging of command-line flags with an optional flat JSON config file.
//!
//! Precedence is flag, then config file, then built-in default. Every
//! resolved option is recorded with its source so reports can say where
//! each value came from.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Config,
    Default,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::Config => "config",
            Source::Default => "default",
        }
    }
}

/// Reads a config file: a single JSON object with scalar values. Keys use
/// the long flag names with `-` or `_` (`max-iter` and `max_iter` are the
/// same key).
pub fn load_config(path: &Path) -> CliResult<Map<String, Value>> {
    if !path.exists() {
        return Err(CliError::MissingFile(vec![path.to_path_buf()]));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let Value::Object(map) = value else {
        return Err(CliError::Format { path: path.to_path_buf(), msg: "config must be a JSON object".into() });
    };
    let mut flat = Map::new();
    for (k, v) in map {
        if v.is_object() || v.is_array() {
            return Err(CliError::Format {
                path: path.to_path_buf(),
                msg: format!("config key `{k}` must hold a scalar (lists are comma-separated strings)"),
            });
        }
        flat.insert(k.replace('_', "-"), v);
    }
    Ok(flat)
}

/// Collects resolved values, their provenance and every violation found.
#[derive(Debug, Default)]
pub struct Resolver {
    config: Map<String, Value>,
    used: Vec<String>,
    provenance: BTreeMap<String, Value>,
    errors: Vec<String>,
    missing: Vec<PathBuf>,
}

impl Resolver {
    pub fn new(config: Map<String, Value>) -> Self {
        Resolver { config, ..Default::default() }
    }

    fn record(&mut self, key: &str, value: Value, source: Source) {
        let mut entry = Map::new();
        entry.insert("source".into(), Value::String(source.name().into()));
        entry.insert("value".into(), value);
        self.provenance.insert(key.to_string(), Value::Object(entry));
    }

    fn from_config(&mut self, key: &str) -> Option<Value> {
        self.used.push(key.to_string());
        self.config.get(key).cloned()
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: Option<f64>) -> Option<f64> {
        let cfg = self.from_config(key);
        let (v, src) = match (flag, cfg) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(c)) => match c.as_f64() {
                Some(v) => (v, Source::Config),
                None => {
                    self.error(format!("config `{key}` must be a number"));
                    return None;
                }
            },
            (None, None) => (default?, Source::Default),
        };
        self.record(key, Value::from(v), src);
        Some(v)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: Option<usize>) -> Option<usize> {
        let cfg = self.from_config(key);
        let (v, src) = match (flag, cfg) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(c)) => match c.as_u64() {
                Some(v) => (v as usize, Source::Config),
                None => {
                    self.error(format!("config `{key}` must be a nonnegative integer"));
                    return None;
                }
            },
            (None, None) => (default?, Source::Default),
        };
        self.record(key, Value::from(v), src);
        Some(v)
    }

    pub fn bool(&mut self, key: &str, flag: bool) -> bool {
        let cfg = self.from_config(key);
        let (v, src) = match (flag, cfg) {
            (true, _) => (true, Source::Flag),
            (false, Some(c)) => match c.as_bool() {
                Some(v) => (v, Source::Config),
                None => {
                    self.error(format!("config `{key}` must be true or false"));
                    return false;
                }
            },
            (false, None) => (false, Source::Default),
        };
        self.record(key, Value::from(v), src);
        v
    }

    pub fn string(&mut self, key: &str, flag: Option<String>, default: Option<&str>) -> Option<String> {
        let cfg = self.from_config(key);
        let (v, src) = match (flag, cfg) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(Value::String(s))) => (s, Source::Config),
            (None, Some(Value::Number(n))) => (n.to_string(), Source::Config),
            (None, Some(_)) => {
                self.error(format!("config `{key}` must be a string"));
                return None;
            }
            (None, None) => (default?.to_string(), Source::Default),
        };
        self.record(key, Value::String(v.clone()), src);
        Some(v)
    }

    /// Like [`Resolver::string`] but reports a violation when no value is
    /// available from any source.
    pub fn required(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let v = self.string(key, flag, None);
        if v.is_none() {
            self.error(format!("--{key} is required"));
        }
        v
    }

    /// Positive finite real; violations name the flag.
    pub fn positive(&mut self, key: &str, flag: Option<f64>, default: Option<f64>) -> Option<f64> {
        let v = self.f64(key, flag, default)?;
        if !(v > 0.0 && v.is_finite()) {
            self.error(format!("--{key} must be positive, got {v}"));
            return None;
        }
        Some(v)
    }

    /// [`Resolver::positive`] without a default; absence is a violation.
    pub fn required_positive(&mut self, key: &str, flag: Option<f64>) -> Option<f64> {
        let before = self.errors.len();
        let v = self.positive(key, flag, None);
        if v.is_none() && self.errors.len() == before {
            self.error(format!("--{key} is required"));
        }
        v
    }

    /// Parses a resolved string with `parse`, recording failures.
    pub fn parsed<T>(&mut self, key: &str, raw: Option<String>, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        match parse(raw.as_deref()?) {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(format!("--{key}: {e}"));
                None
            }
        }
    }

    /// Records `path` as missing unless it exists.
    pub fn input_file(&mut self, path: &Path) {
        if !path.is_file() {
            self.missing.push(path.to_path_buf());
        }
    }

    /// Keys present in the config file but not understood by the command.
    fn unknown_keys(&self) -> Vec<String> {
        self.config
            .keys()
            .filter(|k| !self.used.iter().any(|u| u == *k))
            .cloned()
            .collect()
    }

    /// Fails with every violation collected so far. Parameter violations
    /// take precedence over missing files for the exit status, but both are
    /// listed.
    pub fn finish(mut self) -> CliResult<BTreeMap<String, Value>> {
        for k in self.unknown_keys() {
            self.errors.push(format!("config key `{k}` is not an option of this command"));
        }
        if !self.errors.is_empty() {
            let mut all = self.errors;
            all.extend(self.missing.iter().map(|p| format!("missing input file {}", p.display())));
            return Err(CliError::Param(all));
        }
        if !self.missing.is_empty() {
            return Err(CliError::MissingFile(self.missing));
        }
        Ok(self.provenance)
    }
}
