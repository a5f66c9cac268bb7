//! Flat key-value run configuration. Lines are `key = value`; `[section]`
//! headers prefix the keys that follow (`alpha = 1` under `[gap]` becomes
//! `gap.alpha`). Command-line flags always win; the resolved map is embedded
//! verbatim in every report.

use anyhow::{anyhow, Context, Result};
use std::collections::BTreeMap;

#[derive(Default, Debug, Clone)]
pub struct Resolved {
    entries: BTreeMap<String, String>,
    pub source: Option<String>,
}

impl Resolved {
    pub fn load(path: Option<&str>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {path}"))?;
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config {path}:{}: expected key = value", lineno + 1))?;
            let key = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries, source: Some(path.to_string()) })
    }

    /// Lookup with section fallback: "gap.alpha" then "alpha".
    pub fn get(&self, key: &str) -> Option<String> {
        if let Some(v) = self.entries.get(key) {
            return Some(v.clone());
        }
        key.rsplit_once('.')
            .and_then(|(_, bare)| self.entries.get(bare))
            .cloned()
    }

    pub fn resolve_f64(&self, key: &str, flag: Option<f64>) -> Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        self.get(key)
            .ok_or_else(|| anyhow!("missing required value {key} (flag or config)"))?
            .parse()
            .map_err(|e| anyhow!("config value {key} is not a number: {e}"))
    }

    pub fn resolve_str(&self, key: &str, flag: Option<String>) -> Result<String> {
        flag.or_else(|| self.get(key))
            .ok_or_else(|| anyhow!("missing required value {key} (flag or config)"))
    }

    pub fn as_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source": self.source,
            "entries": self.entries,
        })
    }
}
