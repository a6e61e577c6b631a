//! Schema-versioned CSV and JSON emission. Every metrics file is written
//! whole (never appended) with a schema comment line ahead of the header
//! row.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

pub fn write_csv(
    path: &Path,
    schema: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut text = format!("# schema: {schema}\n{}\n", header.join(","));
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Render a float with enough digits to reproduce it exactly.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}
