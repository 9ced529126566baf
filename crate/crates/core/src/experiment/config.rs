use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

/// Keys accepted in a config file.
pub const KEYS: [&str; 12] = [
    "preset", "n", "p", "grid", "groups", "b", "B", "bcast", "alpha", "beta", "gamma", "seed",
];

/// A flat `key = value` file. Blank lines and everything after `#` are
/// ignored; keys are case-sensitive (`b` and `B` differ).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        text.parse().map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse().map_err(|e| format!("config key `{key}`: {e}")))
            .transpose()
    }
}

impl FromStr for ConfigFile {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("line {}: unknown key `{key}`", i + 1));
            }
            if values.insert(key.to_owned(), value.trim().to_owned()).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", i + 1));
            }
        }
        Ok(Self { values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_case() {
        let c: ConfigFile = "# desk run\nn = 64\nb=4 # inner\nB=8\n\nalpha=1e-4\n".parse().unwrap();
        assert_eq!(c.parse::<u64>("n").unwrap(), Some(64));
        assert_eq!(c.parse::<u64>("b").unwrap(), Some(4));
        assert_eq!(c.parse::<u64>("B").unwrap(), Some(8));
        assert_eq!(c.parse::<f64>("alpha").unwrap(), Some(1e-4));
        assert_eq!(c.parse::<f64>("beta").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!("n 64".parse::<ConfigFile>().is_err());
        assert!("size=64".parse::<ConfigFile>().is_err());
        assert!("n=1\nn=2".parse::<ConfigFile>().is_err());
        let c: ConfigFile = "n=lots".parse().unwrap();
        assert!(c.parse::<u64>("n").is_err());
    }
}
