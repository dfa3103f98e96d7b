//! Canonical JSON output and input loading.
//!
//! Output JSON has sorted keys and every float rounded to 12 significant
//! digits, so repeated runs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::geometry::{Builtin, PartiallyConvexSet, SetJson};

/// Significant digits kept in canonical output.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Plain-text form in the spirit of `%.12g`: shortest representation of
/// the rounded value, `nan`/`inf`/`-inf` for non-finite inputs.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let r = round_sig(x);
    let abs = r.abs();
    if abs != 0.0 && !(1e-5..1e16).contains(&abs) {
        let s = format!("{r:e}");
        return s;
    }
    format!("{r}")
}

fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("f64 number");
            serde_json::Number::from_f64(round_sig(f)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        // serde_json maps are ordered by key
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = canonicalize(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Loads a set from `builtin:NAME` or from a JSON file.
pub fn load_set(source: &str, resolution: usize) -> Result<PartiallyConvexSet> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let builtin: Builtin = name.parse()?;
        if resolution < 2 {
            return Err(invalid("resolution must be at least 2"));
        }
        return Ok(builtin.build(resolution));
    }
    let json: SetJson = read_json(Path::new(source))?;
    PartiallyConvexSet::from_json(&json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(123456789012345.0), 123456789012000.0);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_g(0.5f64.sqrt()), "0.707106781187");
        assert_eq!(format_g(-0.0), "0");
        assert_eq!(format_g(2.0), "2");
        assert_eq!(format_g(1e-9), "1e-9");
        assert_eq!(format_g(f64::INFINITY), "inf");
    }

    #[test]
    fn canonical_json_sorts_and_rounds() {
        let v = json!({"b": 1.0000000000000002, "a": [0.1, {"z": 2, "y": -0.0}]});
        let s = to_canonical_json(&v).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [\n    0.1,\n    {\n      \"y\": 0.0,\n      \"z\": 2\n    }\n  ],\n  \"b\": 1.0\n}\n"
        );
    }

    #[test]
    fn builtin_loading() {
        let set = load_set("builtin:fig1", 5).unwrap();
        assert_eq!(set.grid().len(), 5);
        assert!(load_set("builtin:nope", 5).is_err());
        assert!(load_set("/nonexistent/set.json", 5).is_err());
    }
}
