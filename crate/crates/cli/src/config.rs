//! Config files: flat `key = value` lines or a single JSON object.

use ader_bc_core::{Error, Result};
use serde_json::Value;

/// Settings in file order. Lines starting with `#` and blank lines are
/// skipped in the text form.
pub fn parse_settings(text: &str) -> Result<Vec<(String, String)>> {
    if text.trim_start().starts_with('{') {
        return parse_json(text);
    }
    text.lines()
        .enumerate()
        .map(|(n, line)| (n + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(n, line)| {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {n}: expected `key = value`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_json(text: &str) -> Result<Vec<(String, String)>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(Error::Config("config JSON must be an object".into()));
    };
    map.into_iter()
        .map(|(k, v)| {
            let s = match v {
                Value::String(s) => s,
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => return Err(Error::Config(format!("config key `{k}` has unsupported value {other}"))),
            };
            Ok((k, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form() {
        let s = parse_settings("# run\ncase = euler-smooth\n\norder=3\n").unwrap();
        assert_eq!(s, vec![("case".into(), "euler-smooth".into()), ("order".into(), "3".into())]);
        assert!(parse_settings("order 3").is_err());
    }

    #[test]
    fn json_form() {
        let s = parse_settings(r#"{"cells": 64, "cfl": 0.5, "meshes": [8, 16], "bc-left": "ilw"}"#).unwrap();
        assert!(s.contains(&("cells".into(), "64".into())));
        assert!(s.contains(&("cfl".into(), "0.5".into())));
        assert!(s.contains(&("meshes".into(), "8,16".into())));
        assert!(s.contains(&("bc-left".into(), "ilw".into())));
        assert!(parse_settings("[1, 2]").is_err());
        assert!(parse_settings(r#"{"order": null}"#).is_err());
    }
}
