//! Experiment reports: point estimates, error bars and pass/fail verdicts,
//! serialized deterministically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One point estimate with an optional standard error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
}

/// One embedded pass/fail assertion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    /// How `observed` relates to `threshold` when passing: `<=`, `>=` or
    /// `abs<=` (absolute deviation).
    pub relation: String,
}

impl Check {
    pub fn le(name: &str, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: observed <= threshold,
            observed,
            threshold,
            relation: "<=".into(),
        }
    }

    pub fn ge(name: &str, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: observed >= threshold,
            observed,
            threshold,
            relation: ">=".into(),
        }
    }

    /// |observed - target| <= tolerance, recorded as the deviation.
    pub fn within(name: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: (observed - target).abs() <= tolerance,
            observed: (observed - target).abs(),
            threshold: tolerance,
            relation: "abs<=".into(),
        }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            passed,
            observed: if passed { 1.0 } else { 0.0 },
            threshold: 1.0,
            relation: ">=".into(),
        }
    }
}

/// Seed, parameters, point estimates, error bars and verdicts for one
/// experiment run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub params: BTreeMap<String, serde_json::Value>,
    pub estimates: Vec<Estimate>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null", default)]
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed,
            params: BTreeMap::new(),
            estimates: Vec::new(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn estimate(&mut self, name: &str, value: f64, std_err: Option<f64>) -> &mut Self {
        self.estimates.push(Estimate {
            name: name.to_string(),
            value,
            std_err,
        });
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn note(&mut self, text: &str) -> &mut Self {
        self.notes.push(text.to_string());
        self
    }

    pub fn estimate_value(&self, name: &str) -> Option<f64> {
        self.estimates.iter().find(|e| e.name == name).map(|e| e.value)
    }

    /// All embedded assertions passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Serialize any value to JSON with floats printed at 17 significant digits,
/// so doubles round-trip exactly and payload bytes are reproducible.
pub fn to_json_17(value: &serde_json::Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

fn write_value(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                write_f64_17(f, out);
            }
        }
        serde_json::Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push(':');
                write_value(v, out);
            }
            out.push('}');
        }
    }
}

/// 17 significant digits: enough for exact f64 round trips.
pub fn write_f64_17(f: f64, out: &mut String) {
    if f.is_nan() {
        out.push_str("null");
    } else if f.is_infinite() {
        out.push_str(if f > 0.0 { "1e999" } else { "-1e999" });
    } else {
        out.push_str(&format!("{f:.16e}"));
    }
}

/// Flatten the scalar leaves of a JSON value into `(dotted.path, value)`
/// rows; the CSV projection of a report.
pub fn flatten_scalars(value: &serde_json::Value, prefix: &str, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_scalars(v, &path, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_scalars(v, &format!("{prefix}[{i}]"), rows);
            }
        }
        serde_json::Value::Number(n) => {
            let mut s = String::new();
            if let Some(i) = n.as_i64() {
                s = i.to_string();
            } else if let Some(u) = n.as_u64() {
                s = u.to_string();
            } else {
                write_f64_17(n.as_f64().unwrap_or(f64::NAN), &mut s);
            }
            rows.push((prefix.to_string(), s));
        }
        serde_json::Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        serde_json::Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        serde_json::Value::Null => rows.push((prefix.to_string(), "null".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly_through_json_17() {
        let values = [0.15, 1.0 / 3.0, 2.0 / 17.0, 1e-300, -0.0625];
        for &v in &values {
            let json = to_json_17(&serde_json::json!({ "x": v }));
            let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed["x"].as_f64().unwrap(), v);
        }
    }

    #[test]
    fn check_constructors_set_verdicts() {
        assert!(Check::le("a", 0.1, 0.2).passed);
        assert!(!Check::le("a", 0.3, 0.2).passed);
        assert!(Check::within("b", 0.15, 0.15 + 1e-12, 1e-10).passed);
        assert!(Check::ge("c", 0.3, 0.2).passed);
    }

    #[test]
    fn report_passed_requires_all_checks() {
        let mut r = ExperimentReport::new("demo", 7);
        r.check(Check::le("ok", 0.0, 1.0));
        assert!(r.passed());
        r.check(Check::ge("bad", 0.0, 1.0));
        assert!(!r.passed());
    }

    #[test]
    fn flatten_produces_dotted_paths() {
        let v = serde_json::json!({"a": {"b": 1.5}, "c": [true, "x"]});
        let mut rows = Vec::new();
        flatten_scalars(&v, "", &mut rows);
        let keys: Vec<_> = rows.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(keys, vec!["a.b", "c[0]", "c[1]"]);
    }
}
