//! Output helpers: pretty JSON files, CSV files, and aligned text tables.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{io, HarnessError};

/// Serializes pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    fs::write(path, to_json_pretty(value)?).map_err(|e| io(path, e))
}

/// Writes a CSV file. Fields are joined with commas verbatim; callers only
/// pass numeric and identifier-like values.
pub fn write_csv(
    path: &Path,
    headers: &[&str],
    rows: &[Vec<String>],
) -> Result<(), HarnessError> {
    let mut text = headers.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io(path, e))
}

/// Fixed-width text table: first column left-aligned, the rest
/// right-aligned, two-space gutters.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.headers.len(), "table row width mismatch");
        self.rows.push(fields.to_vec());
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (i, field) in row.iter().enumerate() {
                widths[i] = widths[i].max(field.len());
            }
        }
        let mut out = String::new();
        let push_row = |fields: &[String], out: &mut String| {
            for (i, field) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                if i == 0 {
                    out.push_str(&format!("{:<width$}", field, width = widths[i]));
                } else {
                    out.push_str(&format!("{:>width$}", field, width = widths[i]));
                }
            }
            out.push('\n');
        };
        push_row(&self.headers, &mut out);
        for row in &self.rows {
            push_row(row, &mut out);
        }
        out
    }
}
