//! Flat `key = value` configuration files. Keys are long flag names; values
//! given on the command line take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
            let key = k.trim().trim_start_matches("--").to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(format!("config line {}: duplicate key {key:?}", n + 1));
            }
        }
        Ok(Self { entries })
    }

    /// Fails on keys the subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown config key {k:?}")),
            None => Ok(()),
        }
    }

    /// The flag value if present, else the parsed config value.
    pub fn merge<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key {key}: {e}")))
            .transpose()
    }

    pub fn merge_flag(&self, flag: bool, key: &str) -> Result<bool, String> {
        Ok(flag || self.merge::<bool>(None, key)?.unwrap_or(false))
    }
}
