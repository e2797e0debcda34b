//! Output plumbing: the text / JSON-lines switch, 9-significant-digit
//! number formatting for text reports, and the nats→bits display
//! conversion. JSON output keeps full float precision so records
//! round-trip; the 9-digit rule applies to the human-readable format.

use std::io::Write;

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};

use crate::failure::Failure;

/// Prints one line to stdout like `println!`, but treats a closed pipe as
/// the consumer saying "enough" (`lnml verify | head`) — the process exits
/// quietly with status 0 instead of panicking mid-report. Any other write
/// error is a real I/O failure and exits with the usage/input status.
macro_rules! out {
    ($($arg:tt)*) => {
        $crate::output::print_line(::std::format_args!($($arg)*))
    };
}
pub(crate) use out;

/// The implementation behind [`out!`]; call it through the macro.
pub fn print_line(args: std::fmt::Arguments<'_>) {
    let mut stdout = std::io::stdout().lock();
    let outcome = stdout.write_fmt(args).and_then(|()| stdout.write_all(b"\n"));
    if let Err(err) = outcome {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {err}");
        std::process::exit(2);
    }
}

/// Output format for every subcommand.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Human-readable lines, numbers shown with 9 significant digits.
    Text,
    /// One JSON object per line, full float precision.
    JsonLines,
}

/// An explicit `--format` wins; otherwise the `LNML_FORMAT` environment
/// variable supplies the default, falling back to text.
pub fn resolve_format(flag: Option<Format>) -> Result<Format, Failure> {
    if let Some(format) = flag {
        return Ok(format);
    }
    match std::env::var("LNML_FORMAT") {
        Err(std::env::VarError::NotPresent) => Ok(Format::Text),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Failure::usage("LNML_FORMAT is set but is not valid UTF-8"))
        }
        Ok(value) => match value.as_str() {
            "text" => Ok(Format::Text),
            "json-lines" => Ok(Format::JsonLines),
            other => Err(Failure::usage(format!(
                "LNML_FORMAT must be \"text\" or \"json-lines\", got {other:?}"
            ))),
        },
    }
}

/// Display unit for code lengths. Internally everything is nats; bits are
/// a division by ln 2 at the print boundary.
#[derive(Clone, Copy)]
pub struct Unit {
    bits: bool,
}

impl Unit {
    pub fn new(bits: bool) -> Self {
        Self { bits }
    }

    pub fn label(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    pub fn convert(&self, nats: f64) -> f64 {
        if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }
}

/// 9 significant digits: plain decimal for everyday magnitudes,
/// scientific notation outside [1e-4, 1e13). The magnitude is read off
/// the rounded scientific rendering so carries across a decade
/// (0.9999999999 → 1.00000000) don't gain a digit.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let scientific = format!("{x:.8e}");
    let (_, exponent) = scientific.split_once('e').expect("e-format has an exponent");
    let magnitude: i32 = exponent.parse().expect("exponent is an integer");
    if (-4..=12).contains(&magnitude) {
        let decimals = (8 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        scientific
    }
}

/// `[a, b, c]` with 9-significant-digit entries.
pub fn vec_entries(v: &DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|&x| sig9(x)).collect();
    format!("[{}]", cells.join(", "))
}

/// `[[a, b], [c, d]]` with 9-significant-digit entries, row-major.
pub fn mat_rows(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols()).map(|j| sig9(m[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Entries of a vector, for JSON embedding.
pub fn vec_json(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Row-major rows of a matrix, for JSON embedding.
pub fn mat_json(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
