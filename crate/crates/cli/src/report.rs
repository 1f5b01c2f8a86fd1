//! Report envelope and the plain-text table rendering.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct InputSummary {
    pub path: String,
    pub kind: String,
    pub f_vectors: Vec<NamedFVector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFVector {
    pub complex: String,
    pub f_vector: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputSummary>,
    pub result: Value,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, inputs: Vec<InputSummary>, result: impl Serialize, passed: bool) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            result: serde_json::to_value(result).expect("reports serialize"),
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        let mut out = String::new();
        render(&value, 0, &mut out);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn row_of_scalars(v: &Value) -> Option<String> {
    match v {
        Value::Array(items) => items
            .iter()
            .map(scalar)
            .collect::<Option<Vec<_>>>()
            .map(|cells| if cells.is_empty() { "(empty)".into() } else { cells.join(" ") }),
        _ => None,
    }
}

/// Objects whose fields are all scalars or scalar rows, sharing one key set.
fn as_table(items: &[Value]) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let first = items.first()?.as_object()?;
    let keys: Vec<String> = first.keys().cloned().collect();
    let mut rows = Vec::new();
    for item in items {
        let obj = item.as_object()?;
        if obj.keys().ne(keys.iter()) {
            return None;
        }
        rows.push(
            obj.values()
                .map(|v| scalar(v).or_else(|| row_of_scalars(v)))
                .collect::<Option<Vec<_>>>()?,
        );
    }
    Some((keys, rows))
}

fn pad(out: &mut String, indent: usize) {
    out.extend(std::iter::repeat(' ').take(indent));
}

fn render(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                pad(out, indent);
                if let Some(s) = scalar(v).or_else(|| row_of_scalars(v)) {
                    out.push_str(&format!("{}: {}\n", k, s));
                } else {
                    out.push_str(&format!("{}:\n", k));
                    render(v, indent + 2, out);
                }
            }
        }
        Value::Array(items) => {
            if let Some((keys, rows)) = as_table(items) {
                let mut widths: Vec<usize> = keys.iter().map(|k| k.chars().count()).collect();
                for r in &rows {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.chars().count());
                    }
                }
                let line = |cells: &[String], out: &mut String| {
                    pad(out, indent);
                    let parts: Vec<String> = cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, &w)| format!("{:<w$}", c, w = w))
                        .collect();
                    out.push_str(parts.join(" | ").trim_end());
                    out.push('\n');
                };
                line(&keys, out);
                for r in &rows {
                    line(r, out);
                }
            } else {
                for item in items {
                    if let Some(s) = scalar(item).or_else(|| row_of_scalars(item)) {
                        pad(out, indent);
                        out.push_str(&s);
                        out.push('\n');
                    } else {
                        pad(out, indent);
                        out.push_str("-\n");
                        render(item, indent + 2, out);
                    }
                }
            }
        }
        other => {
            pad(out, indent);
            out.push_str(&scalar(other).unwrap_or_default());
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tables_for_uniform_rows() {
        let r = Report::new(
            "demo",
            vec![],
            json!({"rows": [{"degree": 0, "betti": 1}, {"degree": 1, "betti": 2}], "betti": [1, 2, 1]}),
            true,
        );
        let t = r.to_table();
        assert!(t.contains("betti: 1 2 1"));
        assert!(t.contains("betti | degree"));
        assert!(t.contains("2     | 1"));
    }

    #[test]
    fn json_is_stable() {
        let r = Report::new("demo", vec![], json!({"b": 1, "a": [true, null]}), false);
        assert_eq!(r.to_json(), r.to_json());
        assert!(r.to_json().starts_with("{\n  \"schema_version\": 1,"));
    }
}
