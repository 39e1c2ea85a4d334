//! Flat `key=value` configs (JSON objects also accepted).

use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

/// Keys whose value is always a list, even when only one item is given.
const LIST_KEYS: &[&str] = &["n_list"];

pub fn parse_text(text: &str) -> anyhow::Result<Map<String, Value>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return match serde_json::from_str(trimmed)? {
            Value::Object(m) => Ok(m),
            _ => bail!("config must be a JSON object"),
        };
    }
    let mut map = Map::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got {line:?}", i + 1);
        };
        map.insert(k.trim().to_string(), scalar_or_list(v.trim()));
    }
    for key in LIST_KEYS {
        if let Some(v) = map.get_mut(*key) {
            if !v.is_array() {
                *v = Value::Array(vec![v.take()]);
            }
        }
    }
    Ok(map)
}

fn scalar(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn scalar_or_list(v: &str) -> Value {
    if let Ok(x) = serde_json::from_str(v) {
        return x;
    }
    if v.contains(',') {
        Value::Array(v.split(',').map(|s| scalar(s.trim())).collect())
    } else {
        Value::String(v.to_string())
    }
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let map = parse_text(&text)?;
    serde_json::from_value(Value::Object(map)).with_context(|| format!("config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_json_agree() {
        let flat = parse_text("# c\nkind = scad\na=3.7\nn_list=1000,1000000\nzeta=-1\n").unwrap();
        let json = parse_text(r#"{"kind":"scad","a":3.7,"n_list":[1000,1000000],"zeta":-1}"#).unwrap();
        assert_eq!(flat, json);
        let one = parse_text("n_list=50").unwrap();
        assert_eq!(one["n_list"], serde_json::json!([50]));
        assert!(parse_text("oops").is_err());
    }
}
