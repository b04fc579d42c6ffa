//! File formats: long-format sample CSV, residual CSV, and number rounding
//! for stable text output.

use std::io::Read;

use serde_json::Value;

use crate::error::{Error, Result};

/// Significant digits kept in every report.
pub const SIGNIFICANT_DIGITS: usize = 10;

/// One labelled series in original observation order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub id: String,
    pub values: Vec<f64>,
}

fn read_grouped<R: Read>(reader: R, value_column: &str) -> Result<Vec<Series>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["sample_id", value_column];
    if headers.len() != 2 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Parse(format!(
            "expected header `sample_id,{value_column}`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out: Vec<Series> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default();
        let raw = rec.get(1).unwrap_or_default();
        let v: f64 = raw.parse().map_err(|_| {
            Error::Parse(format!(
                "row {}: cannot parse `{raw}` as a number",
                line + 2
            ))
        })?;
        if !v.is_finite() {
            return Err(Error::Parse(format!(
                "row {}: value is not finite",
                line + 2
            )));
        }
        if id.is_empty() {
            return Err(Error::Parse(format!("row {}: empty sample_id", line + 2)));
        }
        match out.iter_mut().find(|s| s.id == id) {
            Some(s) => s.values.push(v),
            None => out.push(Series {
                id: id.to_string(),
                values: vec![v],
            }),
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("input contains no observations"));
    }
    Ok(out)
}

/// Reads `sample_id,value` rows. Series appear in order of first occurrence
/// and keep their row order.
pub fn read_long_csv<R: Read>(reader: R) -> Result<Vec<Series>> {
    read_grouped(reader, "value")
}

/// Reads `sample_id,residual` rows, same conventions as [`read_long_csv`].
pub fn read_residual_csv<R: Read>(reader: R) -> Result<Vec<Series>> {
    read_grouped(reader, "residual")
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Text form of [`round_sig`]; non-finite values print as `NaN`/`inf`.
pub fn format_sig(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        format!("{x}")
    }
}

/// Applies [`round_sig`] to every non-integer number inside a JSON value.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                serde_json::Number::from_f64(round_sig(x))
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}
