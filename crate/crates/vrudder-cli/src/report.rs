//! Structured-text reports and CSV traces.
//!
//! Reports are ordered `key = value` records for machine diffing; CSV files
//! carry a fixed header and six-decimal fixed-point values.  All formatting
//! is deterministic, so identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// Field width used for every floating-point value in reports and traces.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// An ordered key/value report.
#[derive(Debug, Default, Clone)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a pre-formatted value.
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_string(), value.into()));
    }

    /// Append a float as fixed six-decimal text.
    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    /// Append an integer.
    pub fn push_usize(&mut self, key: &str, value: usize) {
        self.push(key, value.to_string());
    }

    /// Render as `key = value` lines in insertion order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Write the rendered report to a file.
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Write a CSV file: a fixed header line plus six-decimal rows.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 80 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Assemble columns of equal length into rows.
pub fn columns_to_rows(columns: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = columns.first().map_or(0, |c| c.len());
    (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_preserves_order_and_format() {
        let mut r = Report::new();
        r.push_f64("alpha", 1.0 / 3.0);
        r.push_usize("count", 7);
        r.push("name", "dutch_roll");
        assert_eq!(r.render(), "alpha = 0.333333\ncount = 7\nname = dutch_roll\n");
    }

    #[test]
    fn float_formatting_is_fixed_width_and_total() {
        assert_eq!(fmt_f64(2.0), "2.000000");
        assert_eq!(fmt_f64(-0.5), "-0.500000");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn columns_zip_into_rows() {
        let a = [1.0, 2.0];
        let b = [3.0, 4.0];
        assert_eq!(
            columns_to_rows(&[&a, &b]),
            vec![vec![1.0, 3.0], vec![2.0, 4.0]]
        );
    }
}
