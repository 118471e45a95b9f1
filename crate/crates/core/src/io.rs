//! Result files: CSV tables with a column legend, and JSON documents.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Significant digits used in CSV cells.
pub const CSV_DIGITS: usize = 10;

/// Shortest decimal form of `x` rounded to `digits` significant digits.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_sig(*x, CSV_DIGITS),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}
impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n as u64)
    }
}
impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// A table with named columns and a one-line description of each.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<(&'static str, &'static str)>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// CSV text: `#`-prefixed legend lines, header, then rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (name, desc) in &self.columns {
            out.push_str(&format!("# {name}: {desc}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0)).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Read a table written by [`Table::to_csv`] back as header + string rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

/// Write `contents` to `dir/name`, creating `dir` as needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, table: &Table) -> Result<PathBuf> {
    write_file(dir, name, &table.to_csv()?)
}

/// Pretty JSON; floats use shortest round-trip decimal form.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    write_file(dir, name, &to_json(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.1, 10), "0.1");
        assert_eq!(fmt_sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(fmt_sig(123456.789012345, 10), "123456.789");
        assert_eq!(fmt_sig(f64::INFINITY, 10), "inf");
        assert_eq!(fmt_sig(0.0, 10), "0");
    }

    #[test]
    fn header_only_table_round_trips() {
        let t = Table::new(vec![("a", "first"), ("b", "second")]);
        let (h, rows) = read_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(h, ["a", "b"]);
        assert!(rows.is_empty());
    }

    #[test]
    fn rows_round_trip() {
        let mut t = Table::new(vec![("x", "value"), ("s", "label")]);
        t.push(vec![2.5.into(), "c4".into()]);
        let (_, rows) = read_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(rows, vec![vec!["2.5".to_string(), "c4".to_string()]]);
    }
}
