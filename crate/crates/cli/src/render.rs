use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

pub fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Flattens nested JSON into `(dotted.path, scalar)` pairs in document order.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push((prefix.to_string(), v.clone()));
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

fn scalar(v: &Value, decimals: u32) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => attrmean::tables::fmt_num(x, decimals),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(a) => {
            let parts: Vec<String> = a.iter().map(|x| scalar(x, decimals)).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

/// Key/value rendering of any report.
pub fn key_values<T: Serialize>(v: &T, format: Format, decimals: u32) -> String {
    if format == Format::Json {
        return json(v);
    }
    let value = serde_json::to_value(v).expect("reports serialize");
    let mut pairs = Vec::new();
    flatten("", &value, &mut pairs);
    match format {
        Format::Markdown => {
            let mut out = String::from("| field | value |\n|---|---:|\n");
            for (k, v) in pairs {
                let _ = writeln!(out, "| {k} | {} |", scalar(&v, decimals));
            }
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(["field", "value"]);
            for (k, v) in pairs {
                let _ = w.write_record([k, scalar(&v, decimals)]);
            }
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
        Format::Json => unreachable!(),
    }
}

/// Row-oriented rendering with explicit headers.
pub fn rows(headers: &[&str], rows: &[Vec<String>], format: Format) -> String {
    match format {
        Format::Markdown => {
            let mut out = format!("| {} |\n", headers.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(headers.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
            out
        }
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(headers);
            for r in rows {
                let _ = w.write_record(r);
            }
            String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_keeps_order_and_paths() {
        let v = serde_json::json!({"a": 1.23456, "b": {"c": [1.0, 2.0], "d": [{"e": 1}]}});
        let md = key_values(&v, Format::Markdown, 2);
        assert!(md.contains("| a | 1.23 |"));
        assert!(md.contains("| b.c | [1.00, 2.00] |"));
        assert!(md.contains("| b.d.0.e | 1 |"));
        let csv = key_values(&v, Format::Csv, 3);
        assert!(csv.starts_with("field,value\na,1.235\n"));
    }

    #[test]
    fn row_tables() {
        let r = rows(&["x", "y"], &[vec!["1".into(), "a,b".into()]], Format::Csv);
        assert_eq!(r, "x,y\n1,\"a,b\"\n");
        let r = rows(&["x"], &[vec!["1".into()]], Format::Markdown);
        assert_eq!(r, "| x |\n|---|\n| 1 |\n");
    }
}
