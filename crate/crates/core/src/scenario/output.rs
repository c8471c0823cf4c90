use std::path::Path;
use std::str::FromStr;

use serde_json::{Number, Value};

use super::{Category, CliError};
use crate::analysis::EntropySeries;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x` as a JSON number with 17 significant digits; `null` if not finite.
pub fn json_number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format_number(x)).map_or(Value::Null, Value::Number)
}

/// Rewrites every float in `v` with [`json_number`].
pub(super) fn normalize_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            n.as_f64().map_or(Value::Null, json_number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_numbers).collect()),
        Value::Object(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| (k, normalize_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(Category::Io, format!("{}: {e}", path.display()))
}

pub(super) fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// `t,det,entropy` rows.
pub fn write_series_csv(path: &Path, series: &EntropySeries) -> Result<(), CliError> {
    let header = ["t", "det", "entropy"].map(String::from);
    let rows: Vec<Vec<String>> = (0..series.len())
        .map(|i| {
            vec![
                format_number(series.times[i]),
                format_number(series.det[i]),
                format_number(series.entropy[i]),
            ]
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub(super) fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}
