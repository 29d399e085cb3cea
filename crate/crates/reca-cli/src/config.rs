//! Flat `key = value` run configs with command-line overrides.
//!
//! One assignment per line, `#` starts a comment, later assignments win.
//! Every key must be consumed by the command reading the config; leftovers
//! are reported with the line they came from, so typos never pass silently.

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use reca_core::{Error, Result};

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    /// 1-based config line, or 0 for a `--set` override.
    line: usize,
    consumed: bool,
}

impl Entry {
    fn origin(&self) -> String {
        if self.line == 0 {
            "command line".to_string()
        } else {
            format!("line {}", self.line)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: Vec<Entry>,
}

impl Config {
    /// Reads `path` and layers `overrides` (each `key=value`) on top.
    /// An unreadable config is a usage error, not a data error.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Config::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {} of {} is not `key = value`: {raw:?}",
                    no + 1,
                    path.display()
                )));
            };
            cfg.push(key, value, no + 1)?;
        }
        for raw in overrides {
            let Some((key, value)) = raw.split_once('=') else {
                return Err(Error::Config(format!("--set wants key=value, got {raw:?}")));
            };
            cfg.push(key, value, 0)?;
        }
        Ok(cfg)
    }

    fn push(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Config(format!("bad config key {key:?}")));
        }
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
            consumed: false,
        });
        Ok(())
    }

    /// Last value assigned to `key`, marking every assignment of it consumed.
    pub fn take(&mut self, key: &str) -> Option<String> {
        let mut found = None;
        for e in &mut self.entries {
            if e.key == key {
                e.consumed = true;
                found = Some(e.value.clone());
            }
        }
        found
    }

    pub fn take_or(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    /// Parse the value of `key` if present; errors name the key and value.
    pub fn take_parse<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("bad value {v:?} for config key {key:?}"))
            }),
        }
    }

    pub fn take_parse_or<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.take_parse(key)?.unwrap_or(default))
    }

    /// Comma-separated list under `key`, empty if absent.
    pub fn take_list(&mut self, key: &str) -> Vec<String> {
        match self.take(key) {
            None => Vec::new(),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    /// Fails if any assignment was never consumed, naming key and origin.
    pub fn finish(self) -> Result<()> {
        match self.entries.iter().find(|e| !e.consumed) {
            None => Ok(()),
            Some(e) => Err(Error::Config(format!(
                "unknown config key {:?} ({})",
                e.key,
                e.origin()
            ))),
        }
    }

    /// Everything consumed so far plus the rest, as a JSON object for the
    /// manifest. Later assignments shadow earlier ones, like `take`.
    pub fn echo(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut map = serde_json::Map::new();
        for e in &self.entries {
            map.insert(e.key.clone(), serde_json::Value::String(e.value.clone()));
        }
        map
    }
}
