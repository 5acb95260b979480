//! Verification reports and the CSV encodings of every emitted table.

use std::io::{self, Write};

use crate::measure::Point2;
use crate::numeric::fmt_g17;

/// Outcome of one check, with the numbers needed to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub passed: bool,
    /// Largest observed deviation from the ideal value.
    pub worst_deviation: f64,
    /// The tolerance the deviation was compared against.
    pub tolerance: f64,
    pub detail: String,
    pub colliding_pair: Option<(Point2, Point2)>,
}

impl VerificationReport {
    pub fn pass(check: &str, worst_deviation: f64, tolerance: f64, detail: String) -> Self {
        VerificationReport {
            check: check.to_string(),
            passed: true,
            worst_deviation,
            tolerance,
            detail,
            colliding_pair: None,
        }
    }

    pub fn fail(check: &str, worst_deviation: f64, tolerance: f64, detail: String) -> Self {
        VerificationReport {
            passed: false,
            ..Self::pass(check, worst_deviation, tolerance, detail)
        }
    }

    pub const CSV_HEADER: &'static str = "check,passed,worst_deviation,tolerance,detail";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.check,
            self.passed,
            fmt_g17(self.worst_deviation),
            fmt_g17(self.tolerance),
            csv_field(&self.detail)
        )
    }
}

/// Quotes a free-text field when it contains a separator or a quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_reports<W: Write>(out: &mut W, reports: &[VerificationReport]) -> io::Result<()> {
    writeln!(out, "{}", VerificationReport::CSV_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// `n,beta` rows. First coordinates are written as exact integers.
pub fn write_window_csv<W: Write>(out: &mut W, points: &[Point2]) -> io::Result<()> {
    writeln!(out, "n,beta")?;
    for p in points {
        writeln!(out, "{},{}", p.x1 as i64, fmt_g17(p.x2))?;
    }
    Ok(())
}

/// Parses an `n,beta` table. Blank lines and `#` comments are skipped.
pub fn parse_window_csv(text: &str) -> Result<Vec<Point2>, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header.replace(' ', "") == "n,beta" => {}
        Some((line, header)) => {
            return Err(format!(
                "line {}: expected header 'n,beta', found '{}'",
                line, header
            ))
        }
        None => return Err("empty spectrum file".to_string()),
    }
    lines
        .map(|(line, l)| {
            let (n, beta) = l
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected two fields", line))?;
            let n: i64 = n.trim().parse().map_err(|_| {
                format!(
                    "line {}: first field '{}' is not an integer",
                    line,
                    n.trim()
                )
            })?;
            let beta: f64 = beta.trim().parse().map_err(|_| {
                format!(
                    "line {}: second field '{}' is not a number",
                    line,
                    beta.trim()
                )
            })?;
            Ok(Point2::new(n as f64, beta))
        })
        .collect()
}
