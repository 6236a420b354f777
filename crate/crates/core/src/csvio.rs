//! Minimal CSV helpers shared by every dump format in the crate.
//!
//! All tables are plain comma-separated values without quoting; floats are
//! written with 17 significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Incrementally built CSV text with a fixed header.
#[derive(Debug, Clone)]
pub struct CsvBuf {
    text: String,
    columns: usize,
}

impl CsvBuf {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = String::new();
        let cols: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        text.push_str(&cols.join(","));
        text.push('\n');
        CsvBuf {
            text,
            columns: cols.len(),
        }
    }

    /// Appends one row; panics if the arity does not match the header.
    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.columns, "csv row arity");
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{}", f.as_ref());
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        fs::write(path, &self.text).map_err(|e| Error::io(path, e))
    }
}

/// A parsed CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str, path: &Path) -> Result<Table> {
        let malformed = |reason: String| Error::MalformedCsv {
            path: path.to_path_buf(),
            reason,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| malformed("missing header".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(malformed(format!(
                    "row {} has {} fields, header has {}",
                    n + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Table::parse(&text, path)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = Table::parse("a,b\n1,2\n3\n", Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::MalformedCsv { .. }));
    }
}
