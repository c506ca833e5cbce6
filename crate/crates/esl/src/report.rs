//! Canonical report rendering.
//!
//! A report serializes the same way every time: object keys sorted, floats
//! printed with 17 significant digits (full `f64` round trip), integers bare,
//! one trailing newline. Two runs with equal inputs therefore produce byte
//! identical files, which is what the regression fixtures compare against.

use crate::CliError;
use serde_json::Value;
use std::fmt::Write as _;

/// Top-level report envelope shared by all subcommands.
pub fn envelope(
    command: &str,
    config_echo: Value,
    results: Value,
    timing_ms: u64,
) -> Value {
    let mut map = serde_json::Map::new();
    map.insert(
        "tool_version".to_owned(),
        Value::String(env!("CARGO_PKG_VERSION").to_owned()),
    );
    map.insert("command".to_owned(), Value::String(command.to_owned()));
    map.insert("config_echo".to_owned(), config_echo);
    map.insert("results".to_owned(), results);
    map.insert(
        "semantics_note".to_owned(),
        Value::String(esl_core::harness::EPSILON_SEMANTICS_NOTE.to_owned()),
    );
    map.insert("timing_ms".to_owned(), Value::from(timing_ms));
    Value::Object(map)
}

/// Renders a JSON value canonically. Null is rejected: the schema has no
/// nulls, and serde turns non-finite floats into null, so rejecting it here
/// catches any NaN or infinity that slipped through the compute layer.
pub fn canonical_json(value: &Value) -> Result<String, CliError> {
    let mut out = String::new();
    write_value(&mut out, value)?;
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, value: &Value) -> Result<(), CliError> {
    match value {
        Value::Null => Err(CliError::Compute(
            "report contains a null (a non-finite number cannot be serialized)".to_owned(),
        )),
        Value::Bool(b) => {
            out.push_str(if *b { "true" } else { "false" });
            Ok(())
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").expect("string write");
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").expect("string write");
            } else {
                let f = n.as_f64().expect("number is one of i64, u64, f64");
                if !f.is_finite() {
                    return Err(CliError::Compute(format!(
                        "report contains a non-finite number: {f}"
                    )));
                }
                write!(out, "{f:.16e}").expect("string write");
            }
            Ok(())
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
            Ok(())
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item)?;
            }
            out.push(']');
            Ok(())
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string serializes"));
                out.push(':');
                write_value(out, &map[*k])?;
            }
            out.push('}');
            Ok(())
        }
    }
}

/// One row of the optional CSV export.
#[derive(Clone, Copy, Debug)]
pub struct CsvRow {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub kind: &'static str,
    pub residual: f64,
}

/// Renders residual rows. For homogeneity rows the third column carries the
/// scale factor: the defect lives on the boundary plane, so its sample is a
/// (scale, pair) combination rather than a triple.
#[must_use]
pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from("x,y,z,kind,residual\n");
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.x, r.y, r.z, r.kind, r.residual
        )
        .expect("string write");
    }
    out
}
