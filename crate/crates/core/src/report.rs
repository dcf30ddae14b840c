//! Machine-readable reports. Floats are written with 17 significant digits
//! so that every value round-trips exactly.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::certify::{Outcome, Verdict};
use crate::error::{Error, Result};

pub const TOOL: &str = "star-spectra";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty JSON with two-space indentation and 17-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_float(x: f64, out: &mut String) {
    if x.is_finite() {
        let _ = write!(out, "{x:.16e}");
    } else {
        out.push_str("null");
    }
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Number(n) if n.is_f64() => write_float(n.as_f64().unwrap_or(f64::NAN), out),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String(k.clone()));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

/// `value` with tool name and version prepended.
pub fn versioned_json<T: Serialize>(value: &T) -> Result<String> {
    to_json(&Envelope { tool: TOOL, version: VERSION, body: value })
}

/// One-line human summary, values rounded to six significant digits.
pub fn summary(v: &Verdict) -> String {
    let status = match &v.outcome {
        Outcome::CertifiedNoResonance { n_discrete } => {
            format!("certified: {n_discrete} discrete eigenvalue(s), no threshold resonance")
        }
        Outcome::Inconclusive { reason } => format!("inconclusive: {reason}"),
    };
    let margin = v.lower_margin().map(|m| format!(", lower margin {:.6}", m.value)).unwrap_or_default();
    format!("{}: ν = {:.6}{margin}, rigor {:?}; {status}", v.name, v.nu(), v.rigor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        let x = std::f64::consts::PI * std::f64::consts::PI;
        let s = to_json(&serde_json::json!({ "nu": x, "n": 2, "name": "t", "list": [0.1, 1e-300] })).unwrap();
        assert!(s.contains("\"nu\": 9.8696044010893580e0"), "{s}");
        assert!(s.contains("\"n\": 2"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["nu"].as_f64().unwrap(), x);
        assert_eq!(back["list"][0].as_f64().unwrap(), 0.1);
        assert_eq!(back["list"][1].as_f64().unwrap(), 1e-300);
    }
}
