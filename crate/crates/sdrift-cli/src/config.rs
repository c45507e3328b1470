//! Flat key-value experiment configs.
//!
//! One `section.key = value` pair per line; `#` starts a comment line and
//! blank lines are ignored. Sections are just dotted prefixes (`drift.*`
//! describes the coefficient, `sim.*` the Monte Carlo engine, `run.*` the
//! experiment), which keeps the files diff-friendly and parseable from any
//! language without a structured-format dependency.
//!
//! Key reads are tracked: once a subcommand has pulled everything it
//! understands, [`Config::reject_unused`] turns every leftover key into an
//! error. Misspelled or misplaced keys therefore fail loudly, and they do
//! so before any expensive computation starts.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// A parsed config file: a flat map from dotted keys to raw value strings.
#[derive(Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    /// Parse config text, rejecting malformed lines and duplicate keys.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let number = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {number}: expected `key = value`, got `{line}`"))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(format!("line {number}: empty key"));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(format!("line {number}: duplicate key `{key}`"));
            }
        }
        Ok(Config {
            values,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    /// Raw value lookup; marks the key as consumed.
    pub fn get(&self, key: &str) -> Option<&str> {
        let found = self.values.get(key).map(String::as_str);
        if found.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        found
    }

    /// Like [`get`](Self::get), but an absent key is an error naming it.
    pub fn require(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("missing key `{key}`"))
    }

    /// Required floating-point value.
    pub fn require_f64(&self, key: &str) -> Result<f64, String> {
        parse_one(key, self.require(key)?)
    }

    /// Optional floating-point value.
    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, String> {
        self.get(key).map(|raw| parse_one(key, raw)).transpose()
    }

    /// Optional unsigned counter.
    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, String> {
        self.get(key).map(|raw| parse_one(key, raw)).transpose()
    }

    /// Optional seed-sized integer.
    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, String> {
        self.get(key).map(|raw| parse_one(key, raw)).transpose()
    }

    /// Optional boolean (`true` / `false`).
    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, String> {
        self.get(key).map(|raw| parse_one(key, raw)).transpose()
    }

    /// Required comma-separated list of floating-point values.
    pub fn require_list_f64(&self, key: &str) -> Result<Vec<f64>, String> {
        self.require(key)?
            .split(',')
            .map(|item| parse_one(key, item.trim()))
            .collect()
    }

    /// Optional comma-separated list of counters.
    pub fn get_list_usize(&self, key: &str) -> Result<Option<Vec<usize>>, String> {
        self.get(key)
            .map(|raw| {
                raw.split(',')
                    .map(|item| parse_one(key, item.trim()))
                    .collect()
            })
            .transpose()
    }

    /// Error out listing every key no getter ever consumed.
    pub fn reject_unused(&self) -> Result<(), String> {
        let used = self.used.borrow();
        let unused: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|key| !used.contains(*key))
            .collect();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(format!(
                "unknown key(s) for this subcommand: `{}`",
                unused.join("`, `")
            ))
        }
    }
}

fn parse_one<T: FromStr>(key: &str, raw: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|err| format!("key `{key}`: cannot parse `{raw}`: {err}"))
}
