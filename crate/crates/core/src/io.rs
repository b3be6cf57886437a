//! Plain-text matrix and vector files.
//!
//! ```text
//! # comments and blank lines are ignored
//! 2          # dimension d
//! 1.0 0.0    # then d² (matrix, row-major) or d (vector) entries: "re [im]"
//! 0.0 0.0
//! 0.0 0.0
//! -1.0 0.0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_entries(text: &str, count_for: impl Fn(usize) -> usize) -> Result<(usize, Vec<Complex64>)> {
    let mut lines = content_lines(text);
    let Some((line, header)) = lines.next() else {
        return parse_err(1, "missing dimension line");
    };
    let dim: usize = match header.parse() {
        Ok(d) if d > 0 => d,
        _ => return parse_err(line, format!("expected a positive dimension, found {header:?}")),
    };
    let expected = count_for(dim);
    let mut entries = Vec::with_capacity(expected);
    let mut last_line = line;
    for (line, body) in lines {
        last_line = line;
        if entries.len() == expected {
            return parse_err(line, format!("more than {expected} entries"));
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() > 2 {
            return parse_err(line, format!("expected \"re [im]\", found {} fields", fields.len()));
        }
        let number = |s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => parse_err(line, format!("not a finite number: {s:?}")),
            }
        };
        let re = number(fields[0])?;
        let im = fields.get(1).map(|s| number(s)).transpose()?.unwrap_or(0.0);
        entries.push(Complex64::new(re, im));
    }
    if entries.len() != expected {
        return parse_err(
            last_line,
            format!("expected {expected} entries, found {}", entries.len()),
        );
    }
    Ok((dim, entries))
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<Complex64>> {
    let (dim, entries) = parse_entries(text, |d| d * d)?;
    Ok(DMatrix::from_row_slice(dim, dim, &entries))
}

pub fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    Ok(parse_entries(text, |d| d)?.1)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<Complex64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: &Path) -> Result<Vec<Complex64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn format_matrix(m: &DMatrix<Complex64>) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{:e} {:e}", m[(i, j)].re, m[(i, j)].im);
        }
    }
    out
}

pub fn format_vector(v: &[Complex64]) -> String {
    let mut out = format!("{}\n", v.len());
    for z in v {
        let _ = writeln!(out, "{:e} {:e}", z.re, z.im);
    }
    out
}
