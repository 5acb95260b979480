//! Plain-text run configuration: `key = value` lines, `#` starts a comment.

use std::collections::BTreeMap;

pub const KEYS: [&str; 14] = [
    "family", "t", "s", "a", "N", "window", "h_min", "ratio", "steps", "seed", "centers", "r",
    "out_path", "format",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected 'key = value'", i + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key '{}'", i + 1, key));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("config key '{}': cannot parse '{}'", key, v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c = ConfigFile::parse("# run\nfamily = power-law  # inline\nt=0.75\n\nsteps = 12\n")
            .unwrap();
        assert_eq!(c.get_str("family"), Some("power-law"));
        assert_eq!(c.get::<f64>("t").unwrap(), Some(0.75));
        assert_eq!(c.get::<usize>("steps").unwrap(), Some(12));
        assert_eq!(c.get::<f64>("s").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("family power-law").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        let c = ConfigFile::parse("t = abc").unwrap();
        assert!(c.get::<f64>("t").is_err());
    }
}
