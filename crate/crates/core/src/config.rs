//! Run configuration files: `key=value` lines or a flat JSON object, keyed by long flag name.
//!
//! Entries are appended to the command line after the user's flags, so they take precedence.
//! `true` turns a switch on, `false` leaves it off, and lists are comma-separated.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_key_value(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn parse_key_value(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key=value", i + 1)))?;
            insert(&mut entries, k.trim(), v.trim().to_string())?;
        }
        Ok(RunConfig { entries })
    }

    fn parse_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        let Value::Object(map) = v else {
            return Err(Error::InvalidInput("config: expected a JSON object".into()));
        };
        let mut entries = BTreeMap::new();
        for (k, v) in map {
            let s = match v {
                Value::String(s) => s,
                Value::Bool(b) => b.to_string(),
                Value::Number(n) => n.to_string(),
                Value::Array(a) => a
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => Err(Error::InvalidInput(format!("config key {k}: list items must be scalars"))),
                    })
                    .collect::<Result<Vec<_>>>()?
                    .join(","),
                _ => return Err(Error::InvalidInput(format!("config key {k}: unsupported value"))),
            };
            insert(&mut entries, &k, s)?;
        }
        Ok(RunConfig { entries })
    }

    pub fn to_key_value(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Values are kept as strings so numbers survive unchanged.
    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self.entries.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        serde_json::to_string_pretty(&Value::Object(map)).expect("string map serializes")
    }

    pub fn to_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            match v.as_str() {
                "true" => out.push(format!("--{k}")),
                "false" => {}
                _ => {
                    out.push(format!("--{k}"));
                    out.push(v.clone());
                }
            }
        }
        out
    }
}

fn insert(entries: &mut BTreeMap<String, String>, k: &str, v: String) -> Result<()> {
    let k = k.trim_start_matches("--");
    if k.is_empty() || k == "config" {
        return Err(Error::InvalidInput(format!("config: invalid key {k:?}")));
    }
    if entries.insert(k.to_string(), v).is_some() {
        return Err(Error::InvalidInput(format!("config: duplicate key {k}")));
    }
    Ok(())
}

/// Removes `--config PATH` (or `--config=PATH`) from `args` and appends the file's entries.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Error::InvalidInput("--config needs a path".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            out.push(a);
        }
    }
    if let Some(p) = path {
        out.extend(RunConfig::load(Path::new(&p))?.to_args());
    }
    Ok(out)
}
