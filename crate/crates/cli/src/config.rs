//! Flat `key = value` run-configuration files.
//!
//! Keys are the long flag names of the active subcommand. A value from the
//! file is used only when the same flag is absent on the command line, so
//! flags always win. Keys that the subcommand does not define are errors,
//! as are duplicate keys.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use hierflow::{Error, Result};

/// Parsed contents of a `--config` file (empty when none was given).
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected `key = value`, found {line:?}"),
                ));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::parse(path, idx + 1, "empty key"));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::parse(path, idx + 1, format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { entries })
    }

    /// Every key must be one the active subcommand understands.
    pub fn restrict(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Precondition(format!(
                    "unknown config key {key:?}; this command accepts {allowed:?}"
                )));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Flag value: command line first, then the file, parsed as `T`.
    pub fn resolve<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                Error::Precondition(format!("config key {key:?} has unusable value {text:?}"))
            }),
        }
    }

    /// Boolean switch: on when either the command line or the file turns it
    /// on (`true`/`false` in the file).
    pub fn resolve_switch(&self, cli: bool, key: &str) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(Error::Precondition(format!(
                "config key {key:?} must be `true` or `false`, found {other:?}"
            ))),
        }
    }
}

/// Final presence check after flag/file merging.
pub fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Precondition(format!("missing required value for --{key}")))
}
