//! Self-describing JSON reports: schema version, resolved config, and a
//! value list where every number carries its provenance
//! (computed | paper-bound | mc-estimate) and tolerance when one applies.

use crate::config::Resolved;
use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "1";

pub struct Report {
    body: Map<String, Value>,
    values: Vec<Value>,
}

pub fn entry(name: &str, value: f64, provenance: &str, tolerance: Option<f64>) -> Value {
    let mut v = json!({
        "name": name,
        "value": value,
        "provenance": provenance,
    });
    if let Some(t) = tolerance {
        v["tolerance"] = json!(t);
    }
    v
}

impl Report {
    pub fn new(kind: &str, cfg: &Resolved) -> Self {
        let mut body = Map::new();
        body.insert("schema_version".into(), json!(SCHEMA_VERSION));
        body.insert("kind".into(), json!(kind));
        body.insert("resolved_config".into(), cfg.as_json());
        Self { body, values: Vec::new() }
    }

    pub fn push(&mut self, value: Value) {
        self.values.push(value);
    }

    pub fn push_field(&mut self, key: &str, value: Value) {
        self.body.insert(key.into(), value);
    }

    /// Print to stdout, or write to `out` when given.
    pub fn emit(mut self, out: Option<&str>) -> Result<()> {
        if !self.values.is_empty() {
            self.body.insert("values".into(), Value::Array(self.values));
        }
        let text = serde_json::to_string_pretty(&Value::Object(self.body))?;
        match out {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("writing report {path}"))?
            }
            None => println!("{text}"),
        }
        Ok(())
    }
}
