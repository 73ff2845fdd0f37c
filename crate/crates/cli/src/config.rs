//! Plain-text `key = value` option files. Blank lines and `#` comments are
//! ignored; keys use the long flag names without dashes.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(format!("line {}: empty key", n + 1));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", n + 1));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = ConfigFile::parse(
            "# start\nsystem = d3\n\nalpha=1/4, 1/8  # two values\nt_end = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.get("system"), Some("d3"));
        assert_eq!(c.get("alpha"), Some("1/4, 1/8"));
        assert_eq!(c.get("t-end"), Some("0.5"));
        assert_eq!(c.keys().count(), 3);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("system d3").is_err());
        assert!(ConfigFile::parse("= d3").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
    }
}
