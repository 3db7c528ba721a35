//! Settings for one command: a flat `key = value` config file overlaid with
//! command-line flags. Flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// Directory that relative paths in `value` are resolved against.
    base: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    entries: BTreeMap<String, Entry>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. Blank lines and lines starting with `#`
    /// are ignored; keys may use `-` or `_`.
    pub fn parse_config(text: &str, base: Option<&Path>, origin: &Path) -> CliResult<Self> {
        let mut p = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::format(origin, format!("line {}: expected key = value", n + 1)))?;
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(CliError::format(origin, format!("line {}: empty key", n + 1)));
            }
            p.entries.insert(key, Entry { value: v.trim().to_string(), base: base.map(Path::to_path_buf) });
        }
        Ok(p)
    }

    pub fn from_config_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(|d| if d.as_os_str().is_empty() { Path::new(".") } else { d });
        Self::parse_config(&text, base, path)
    }

    /// Sets a value given on the command line; relative paths stay relative
    /// to the working directory.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize_key(key), Entry { value: value.into(), base: None });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key).ok_or_else(|| CliError::Input(format!("missing required setting `{key}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).map(|e| match &e.base {
            Some(base) if Path::new(&e.value).is_relative() => base.join(&e.value),
            _ => PathBuf::from(&e.value),
        })
    }

    pub fn require_path(&self, key: &str) -> CliResult<PathBuf> {
        self.require(key)?;
        Ok(self.path(key).unwrap())
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| CliError::Input(format!("setting `{key}` = {v:?}: {e}"))),
        }
    }

    /// Comma-separated numbers.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split_list(v)
                .map(|s| s.parse::<f64>().map_err(|e| CliError::Input(format!("setting `{key}`: {s:?}: {e}"))))
                .collect(),
        }
    }

    /// Comma-separated result caps; `none` means uncapped.
    pub fn caps_or(&self, key: &str, default: &[Option<usize>]) -> CliResult<Vec<Option<usize>>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split_list(v)
                .map(|s| {
                    if s.eq_ignore_ascii_case("none") {
                        Ok(None)
                    } else {
                        s.parse::<usize>()
                            .map(Some)
                            .map_err(|e| CliError::Input(format!("setting `{key}`: {s:?}: {e}")))
                    }
                })
                .collect(),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(CliError::Input(format!("setting `{key}`: expected a boolean, got {v:?}"))),
        }
    }

    /// Raw values, for the run manifest.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect()
    }

    /// Keys not in `known`.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.entries.keys().map(String::as_str).filter(|k| !known.contains(k)).collect()
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}
