use serde::Serialize;
use serde_json::Value;

use super::{Episode, ParseError};

/// Round to 6 significant digits.
pub fn quantize(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn canonical_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            serde_json::Number::from_f64(quantize(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonical_value(v))).collect()),
        other => other,
    }
}

fn canonical<T: Serialize + ?Sized>(t: &T) -> Value {
    canonical_value(serde_json::to_value(t).expect("record types serialize to JSON"))
}

/// Compact canonical JSON: sorted keys, floats at 6 significant digits.
pub fn to_canonical_line<T: Serialize + ?Sized>(t: &T) -> String {
    canonical(t).to_string()
}

pub fn serialize_episode(e: &Episode) -> Vec<u8> {
    to_canonical_line(e).into_bytes()
}

pub fn serialize_episode_pretty(e: &Episode) -> String {
    serde_json::to_string_pretty(&canonical(e)).expect("value serializes")
}

pub fn parse_episode(bytes: &[u8]) -> Result<Episode, ParseError> {
    let v: Value = serde_json::from_slice(bytes)?;
    serde_json::from_value(v).map_err(|e| ParseError::Shape(e.to_string()))
}

/// Project an episode onto its canonical representation, so that
/// `parse(serialize(e)) == e` holds exactly afterwards.
pub fn canonicalize(e: &Episode) -> Episode {
    serde_json::from_value(canonical(e)).expect("canonical form re-parses")
}
