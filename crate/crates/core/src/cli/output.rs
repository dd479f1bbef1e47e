//! Output documents: JSON with every real written to 17 significant digits,
//! and `index,value[,ci_half_width]` CSV tables.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::sim::SimEstimate;

/// A real as a JSON number with 17 significant digits; non-finite values
/// become `null`.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is a valid JSON number"))
}

/// Rewrites every floating-point number in `value` to the fixed format.
pub fn canonical(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => real(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_document<T: Serialize>(value: &T) -> Value {
    canonical(serde_json::to_value(value).expect("output types serialize to JSON"))
}

pub fn render_json(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values always render");
    s.push('\n');
    s
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `index,value` rows starting at `first`.
pub fn csv_values(first: usize, values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", first + i, cell(*v));
    }
    out
}

/// `index,value,ci_half_width` rows starting at `first`.
pub fn csv_estimates(first: usize, estimates: &[SimEstimate]) -> String {
    let mut out = String::from("index,value,ci_half_width\n");
    for (i, e) in estimates.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", first + i, cell(e.mean), cell(e.half_width_99));
    }
    out
}
