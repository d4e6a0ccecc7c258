//! Deterministic artifact writers.
//!
//! CSV: header row, comma separation, LF endings, UTF-8, floats at a fixed
//! 17 significant digits so identical runs produce identical bytes. JSON:
//! serde structs with declaration-order keys.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::Path;

/// One CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Empty,
}

/// Fixed 17-significant-digit scientific form; round-trips every f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match cell {
                Cell::Float(x) => {
                    let _ = write!(out, "{}", format_float(*x));
                }
                Cell::Int(v) => {
                    let _ = write!(out, "{v}");
                }
                Cell::Empty => {}
            }
        }
        out.push('\n');
    }
    out
}

/// The same table as a JSON document with column names and row arrays.
pub fn render_table_json(columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let cols: Vec<serde_json::Value> =
        columns.iter().map(|c| serde_json::Value::from(*c)).collect();
    let data: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| match cell {
                    Cell::Float(x) => serde_json::Value::from(*x),
                    Cell::Int(v) => serde_json::Value::from(*v),
                    Cell::Empty => serde_json::Value::Null,
                })
                .collect::<Vec<_>>()
                .into()
        })
        .collect();
    let doc = serde_json::json!({ "columns": cols, "rows": data });
    serde_json::to_string_pretty(&doc).expect("table JSON never fails to serialize")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -0.987654321, 1.0, 2.5e-17, 1.2345678e-5] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![vec![Cell::Float(1.0), Cell::Int(0), Cell::Empty]];
        let text = render_csv(&["a", "b", "c"], &rows);
        assert_eq!(text, "a,b,c\n1.0000000000000000e0,0,\n");
    }
}
