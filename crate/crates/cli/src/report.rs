use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One entry of the verification ledger.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub numbers: BTreeMap<String, Value>,
    /// Tolerance the numbers were compared against; absent for exact checks.
    pub tolerance: Option<f64>,
    /// Where the numbers come from: "exact", or the grid or sample set.
    pub provenance: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, provenance: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            numbers: BTreeMap::new(),
            tolerance: None,
            provenance: provenance.into(),
        }
    }

    pub fn exact(name: &str, ok: bool) -> Self {
        Self::new(name, ok, "exact")
    }

    pub fn number(mut self, key: &str, v: impl Serialize) -> Self {
        self.numbers.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// What a subcommand hands back before it is wrapped into a report.
pub struct Outcome {
    pub payload: Value,
    pub checks: Vec<Check>,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub payload: Value,
    pub checks: Vec<Check>,
    pub exit_status: i32,
}

/// Hex SHA-256 of the canonical rendering of `inputs`.
pub fn digest(inputs: &Value) -> String {
    hex::encode(Sha256::digest(canonical_json(inputs).as_bytes()))
}

/// JSON with sorted keys and every float printed with 17 significant digits.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out
}

fn indent(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push('{');
            for (k, (key, item)) in sorted.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                indent(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, depth + 1);
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

pub fn render_text(report: &RunReport, summary: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "orbires {}", report.command.join(" "));
    for line in summary {
        let _ = writeln!(out, "  {line}");
    }
    if !report.checks.is_empty() {
        let _ = writeln!(out, "checks:");
    }
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let numbers: Vec<String> = c
            .numbers
            .iter()
            .map(|(k, v)| match v {
                Value::Number(n) if n.is_f64() => format!("{k} = {:.6e}", n.as_f64().unwrap_or(f64::NAN)),
                other => format!("{k} = {other}"),
            })
            .collect();
        let tol = c.tolerance.map(|t| format!(", tol {t:e}")).unwrap_or_default();
        let _ = writeln!(out, "  {status} {} [{}{tol}] {}", c.name, c.provenance, numbers.join(", "));
    }
    let _ = writeln!(out, "exit status {}", report.exit_status);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.1, "a": [1, -2.5], "c": {"z": true, "y": null}});
        let text = canonical_json(&v);
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("-2.5000000000000000e0"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][0], json!(1));
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = json!({"x": 1, "y": [2.0]});
        let b: Value = serde_json::from_str(r#"{"y": [2.0], "x": 1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
