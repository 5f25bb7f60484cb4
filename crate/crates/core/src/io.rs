//! CSV and JSON output with floats pinned to 17 significant digits.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::{Error, Result};

/// `{:.16e}` with an explicit exponent sign, so CSV and JSON agree.
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

fn pin(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) if x.is_finite() => Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float parses")),
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(pin).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, pin(v))).collect()),
        other => other,
    }
}

/// Serializes with every non-integer number rewritten as `{:.16e}`.
pub fn to_pinned_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    serde_json::to_string_pretty(&pin(v)).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Reads a headed two-column CSV (x, φ).
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("{}:{}: {e}", path.display(), i + 1)))
        };
        if cols.len() < 2 {
            return Err(Error::InvalidInput(format!("{}:{}: expected two columns", path.display(), i + 1)));
        }
        x.push(parse(cols[0])?);
        y.push(parse(cols[1])?);
    }
    Ok((x, y))
}
