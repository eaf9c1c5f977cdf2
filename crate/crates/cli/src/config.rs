//! Flat `key = value` config files. Keys are flag names without the leading dashes.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().replace('_', "-");
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<T>().map_err(|e| anyhow!("config `{key}`: {e}"))).transpose()
    }

    /// The flag if given, else the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_bool(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.get::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_precedence() {
        let cfg = ConfigFile::parse("# experiment\nn = 8\nround_cap = 500 # cap\nexact = true\n\n").unwrap();
        assert_eq!(cfg.get::<u32>("n").unwrap(), Some(8));
        assert_eq!(cfg.pick(Some(4u32), "n").unwrap(), Some(4));
        assert_eq!(cfg.pick(None::<u64>, "round-cap").unwrap(), Some(500));
        assert_eq!(cfg.pick(None::<u64>, "seed").unwrap(), None);
        assert!(cfg.pick_bool(false, "exact").unwrap());
        assert!(cfg.get::<u32>("exact").is_err());
        assert!(ConfigFile::parse("just words").is_err());
    }
}
