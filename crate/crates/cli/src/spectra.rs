//! Reading and writing perturbed spectra.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::CliError;

/// One sampled row: index, coupling strength, eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub idx: u64,
    pub l: f64,
    pub z: Vec<Complex64>,
}

pub fn csv_header(n: usize) -> String {
    let mut h = String::from("idx,l");
    for k in 1..=n {
        write!(h, ",re_{k},im_{k}").unwrap();
    }
    h
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

pub fn csv_line(row: &Row) -> String {
    let mut s = format!("{},{}", row.idx, fmt_f64(row.l));
    for v in &row.z {
        write!(s, ",{},{}", fmt_f64(v.re), fmt_f64(v.im)).unwrap();
    }
    s
}

pub fn json_line(row: &Row) -> String {
    let z: Vec<[f64; 2]> = row.z.iter().map(|v| [v.re, v.im]).collect();
    json!({"idx": row.idx, "l": row.l, "z": z}).to_string()
}

/// `{"log_density": v}`, with non-finite values as strings.
pub fn density_line(v: f64) -> String {
    let value = if v.is_finite() {
        json!(v)
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else if v == f64::INFINITY {
        json!("inf")
    } else {
        json!("nan")
    };
    json!({ "log_density": value }).to_string()
}

/// Spectra from CSV sample output, a JSON document, or JSON lines.
pub fn parse_spectra(text: &str) -> Result<Vec<Vec<Complex64>>, CliError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(CliError::Parse("input holds no spectra".into()));
    }
    if trimmed.starts_with("idx") {
        return parse_csv(trimmed);
    }
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return match v {
            Value::Array(items) if items.first().is_some_and(is_spectrum_like) => {
                items.iter().enumerate().map(|(i, item)| spectrum_from_value(item, &format!("[{i}]"))).collect()
            }
            other => Ok(vec![spectrum_from_value(&other, "input")?]),
        };
    }
    trimmed
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let ctx = format!("line {}", i + 1);
            let v: Value = serde_json::from_str(line).map_err(|e| CliError::Parse(format!("{ctx}: {e}")))?;
            spectrum_from_value(&v, &ctx)
        })
        .collect()
}

fn is_spectrum_like(v: &Value) -> bool {
    match v {
        Value::Object(map) => map.contains_key("z"),
        Value::Array(inner) => inner.first().is_some_and(|x| !x.is_number()),
        _ => false,
    }
}

fn spectrum_from_value(v: &Value, ctx: &str) -> Result<Vec<Complex64>, CliError> {
    let (items, ctx) = match v {
        Value::Object(map) => {
            let z = map.get("z").ok_or_else(|| CliError::Parse(format!("{ctx}: missing field `z`")))?;
            let items = z.as_array().ok_or_else(|| CliError::Parse(format!("{ctx}: field `z` must be an array")))?;
            (items, format!("{ctx}.z"))
        }
        Value::Array(items) => (items, ctx.to_string()),
        _ => return Err(CliError::Parse(format!("{ctx}: expected a spectrum"))),
    };
    items
        .iter()
        .enumerate()
        .map(|(k, item)| {
            let bad = || CliError::Parse(format!("{ctx}[{k}]: expected [re, im] or {{\"re\", \"im\"}}"));
            let (re, im) = match item {
                Value::Array(pair) if pair.len() == 2 => (pair[0].as_f64(), pair[1].as_f64()),
                Value::Object(map) => (map.get("re").and_then(Value::as_f64), map.get("im").and_then(Value::as_f64)),
                _ => return Err(bad()),
            };
            Ok(Complex64::new(re.ok_or_else(bad)?, im.ok_or_else(bad)?))
        })
        .collect()
}

fn parse_csv(text: &str) -> Result<Vec<Vec<Complex64>>, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().expect("non-empty");
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() < 2 || names[0] != "idx" || names[1] != "l" || names.len() % 2 != 0 {
        return Err(CliError::Parse(format!("line 1: header must be idx,l,re_1,im_1,... (got '{header}')")));
    }
    let n = (names.len() - 2) / 2;
    if names != csv_header(n).split(',').collect::<Vec<_>>() {
        return Err(CliError::Parse(format!("line 1: header must be {}", csv_header(n))));
    }
    lines
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != names.len() {
                return Err(CliError::Parse(format!("line {}: expected {} fields, got {}", i + 1, names.len(), fields.len())));
            }
            let num = |c: usize| -> Result<f64, CliError> {
                fields[c]
                    .parse()
                    .map_err(|_| CliError::Parse(format!("line {} column {}: invalid number '{}'", i + 1, names[c], fields[c])))
            };
            num(1)?;
            (0..n).map(|k| Ok(Complex64::new(num(2 + 2 * k)?, num(3 + 2 * k)?))).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> Row {
        Row { idx: 3, l: 0.1 + 0.2, z: vec![Complex64::new(-1.0 / 3.0, 2.5e-300), Complex64::new(1e17, 0.0)] }
    }

    #[test]
    fn csv_and_json_round_trip_exactly() {
        let r = row();
        let csv = format!("{}\n{}\n", csv_header(2), csv_line(&r));
        assert_eq!(parse_spectra(&csv).unwrap(), vec![r.z.clone()]);
        let jl = format!("{}\n{}\n", json_line(&r), json_line(&r));
        assert_eq!(parse_spectra(&jl).unwrap(), vec![r.z.clone(), r.z.clone()]);
    }

    #[test]
    fn json_shapes() {
        let one = vec![Complex64::new(0.0, 1.0)];
        assert_eq!(parse_spectra("[[0, 1]]").unwrap(), vec![one.clone()]);
        assert_eq!(parse_spectra(r#"[{"re":0,"im":1}]"#).unwrap(), vec![one.clone()]);
        assert_eq!(parse_spectra(r#"{"z":[[0,1]]}"#).unwrap(), vec![one.clone()]);
        assert_eq!(parse_spectra("[[[0,1]],[[0,1]]]").unwrap(), vec![one.clone(), one]);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_spectra(r#"{"zz":[]}"#).unwrap_err().to_string();
        assert!(e.contains("`z`"), "{e}");
        let e = parse_spectra(r#"{"z":[[0,1],[2]]}"#).unwrap_err().to_string();
        assert!(e.contains("input.z[1]"), "{e}");
        let e = parse_spectra("idx,l,re_1,im_1\n0,1,2,x\n").unwrap_err().to_string();
        assert!(e.contains("line 2 column im_1"), "{e}");
        assert!(parse_spectra("  ").is_err());
    }

    #[test]
    fn density_values() {
        assert_eq!(density_line(f64::NEG_INFINITY), r#"{"log_density":"-inf"}"#);
        assert_eq!(density_line(-0.5), r#"{"log_density":-0.5}"#);
    }
}
