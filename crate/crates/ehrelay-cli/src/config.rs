//! Flat `key = value` config files. Values mirror the long CLI flags; flags
//! given on the command line take precedence. A sweep is declared as
//! `sweep = <param> <range>` and schemes as `scheme = mrc,mmse`.

use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config {} line {}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                ));
            };
            values.insert(
                key.trim().replace('-', "_").to_ascii_lowercase(),
                value.trim().to_string(),
            );
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config field `{key}` = `{raw}`: {e}")),
        }
    }
}

/// Parse a sweep range: either `start:step:stop` or a comma list.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let bad = |why: &str| format!("range `{text}`: {why}");
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || stop < start {
            return Err(bad("requires step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        let mut vals: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
        vals.retain(|v| *v <= stop + 1e-9 * step);
        Ok(vals)
    } else {
        let vals: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        if vals.is_empty() {
            return Err(bad("empty"));
        }
        Ok(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:5:40").unwrap().len(), 9);
        assert_eq!(parse_range("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_range("7").unwrap(), vec![7.0]);
        assert!(parse_range("5:0:1").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn config_round_trip() {
        let dir = std::env::temp_dir().join("ehrelay-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sweep.conf");
        std::fs::write(&path, "# comment\nrho1_db = 12.5\nscheme = mrc,zf\nsweep = theta 0.1:0.1:0.9\n").unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.parse::<f64>("rho1_db").unwrap(), Some(12.5));
        assert_eq!(cfg.get("scheme"), Some("mrc,zf"));
        assert_eq!(cfg.get("sweep"), Some("theta 0.1:0.1:0.9"));
        assert!(cfg.parse::<f64>("scheme").is_err());
    }
}
