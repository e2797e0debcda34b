//! Strict numeric CSV ingestion: UTF-8, comma-separated, one observation
//! per row, no quoting or escaping. The dialect is deliberately minimal so
//! every diagnostic can name the exact file line and column of the
//! offending cell.

use std::fs;
use std::io::Read;

use lnml_core::ObservationMatrix;
use nalgebra::{DMatrix, DVector};

use crate::failure::Failure;

/// Raw text of `path`, with `-` meaning standard input.
pub fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("could not read standard input: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("could not read {path}: {e}")))
    }
}

/// Parse CSV text into numeric rows. `header` skips the first line;
/// trailing blank lines are ignored; column counts must match the first
/// data row. Diagnostics use 1-based file lines (header included) and
/// 1-based columns, prefixed with `what` (e.g. "input" or a file name).
pub fn parse_rows(text: &str, header: bool, what: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .map(|line| line.trim_end_matches('\r'))
        .enumerate()
        .map(|(i, line)| (i + 1, line))
        .collect();
    while lines.last().is_some_and(|(_, line)| line.trim().is_empty()) {
        lines.pop();
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected_columns: Option<usize> = None;
    for (line_no, line) in lines.into_iter().skip(usize::from(header)) {
        if line.trim().is_empty() {
            return Err(Failure::usage(format!("{what} line {line_no} is empty")));
        }
        let mut row = Vec::new();
        for (col, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| {
                Failure::usage(format!(
                    "{what} line {line_no}, column {}: could not parse {cell:?} as a number",
                    col + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(Failure::usage(format!(
                    "{what} line {line_no}, column {}: {cell:?} is not finite",
                    col + 1
                )));
            }
            row.push(value);
        }
        match expected_columns {
            None => expected_columns = Some(row.len()),
            Some(m) if row.len() != m => {
                return Err(Failure::usage(format!(
                    "{what} line {line_no} has {} columns, expected {m} (set by the first data row)",
                    row.len()
                )));
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read observations from `path` (or standard input for `-`).
pub fn read_observations(path: &str, header: bool) -> Result<ObservationMatrix, Failure> {
    let rows = parse_rows(&read_source(path)?, header, "input")?;
    if rows.is_empty() {
        return Err(Failure::usage("n must be ≥ 1 (the input contains no data rows)"));
    }
    let vectors: Vec<DVector<f64>> = rows.into_iter().map(DVector::from_vec).collect();
    Ok(ObservationMatrix::from_rows(&vectors)?)
}

/// Read an m×m matrix from a CSV file (no header row).
pub fn read_square_matrix(path: &str, m: usize) -> Result<DMatrix<f64>, Failure> {
    let rows = parse_rows(&read_source(path)?, false, path)?;
    let columns = rows.first().map_or(0, Vec::len);
    if rows.len() != m || columns != m {
        return Err(Failure::usage(format!(
            "{path}: expected a {m}×{m} matrix to match the data dimension, found {}×{columns}",
            rows.len()
        )));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(m, m, &flat))
}
