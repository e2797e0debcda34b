//! Resolution of the two luckiness flag groups into validated parameters.
//!
//! Explicit mode takes (ν, Σ₀, ρ²) with an optional μ₀; defaults mode
//! derives everything from a variance floor σ² and a mean radius R. The
//! two modes never mix: silent blends would leave the code length without
//! a clear interpretation.

use clap::Args;
use lnml_core::{default_luckiness, LuckinessParams};
use nalgebra::{DMatrix, DVector};

use crate::csv;
use crate::failure::Failure;

#[derive(Args, Debug)]
pub struct LuckinessArgs {
    /// Prior strength ν (must exceed m − 1); explicit mode
    #[arg(long)]
    pub nu: Option<f64>,

    /// Prior location μ₀ as comma-separated reals (default: zeros); explicit mode
    #[arg(long)]
    pub mu0: Option<String>,

    /// Prior scale Σ₀: a positive scalar meaning σ²·I, or a path to an m×m CSV matrix; explicit mode
    #[arg(long)]
    pub sigma0: Option<String>,

    /// Prior mean-coupling ρ² (> 0); explicit mode
    #[arg(long)]
    pub rho2: Option<f64>,

    /// Smallest believable variance scale σ²; defaults mode
    #[arg(long = "sigma2-floor")]
    pub sigma2_floor: Option<f64>,

    /// Radius R of the ball the means are believed to live in; defaults mode
    #[arg(long = "radius-R")]
    pub radius_r: Option<f64>,
}

/// Turn the flag groups into validated parameters for m-dimensional data.
pub fn resolve(args: &LuckinessArgs, m: usize) -> Result<LuckinessParams, Failure> {
    let explicit = args.nu.is_some()
        || args.mu0.is_some()
        || args.sigma0.is_some()
        || args.rho2.is_some();
    let defaults = args.sigma2_floor.is_some() || args.radius_r.is_some();
    match (explicit, defaults) {
        (true, true) => Err(Failure::usage(
            "--nu/--mu0/--sigma0/--rho2 and --sigma2-floor/--radius-R are mutually exclusive \
             luckiness modes; pass one group only",
        )),
        (false, false) => Err(Failure::usage(
            "no luckiness given: pass --nu, --sigma0, and --rho2 (plus optional --mu0), or \
             --sigma2-floor and --radius-R",
        )),
        (true, false) => {
            let nu = args
                .nu
                .ok_or_else(|| Failure::usage("--nu is required with explicit luckiness"))?;
            let sigma0_flag = args
                .sigma0
                .as_deref()
                .ok_or_else(|| Failure::usage("--sigma0 is required with explicit luckiness"))?;
            let rho2 = args
                .rho2
                .ok_or_else(|| Failure::usage("--rho2 is required with explicit luckiness"))?;
            let mu0 = match args.mu0.as_deref() {
                Some(text) => parse_mu0(text, m)?,
                None => DVector::zeros(m),
            };
            let sigma0 = parse_sigma0(sigma0_flag, m)?;
            Ok(LuckinessParams::new(nu, mu0, sigma0, rho2)?)
        }
        (false, true) => {
            let floor = args.sigma2_floor.ok_or_else(|| {
                Failure::usage("--sigma2-floor is required with default luckiness")
            })?;
            let radius = args
                .radius_r
                .ok_or_else(|| Failure::usage("--radius-R is required with default luckiness"))?;
            Ok(default_luckiness(m, floor, radius)?)
        }
    }
}

/// Comma-separated reals, length-checked against the data dimension.
fn parse_mu0(text: &str, m: usize) -> Result<DVector<f64>, Failure> {
    let mut entries = Vec::new();
    for (i, cell) in text.split(',').enumerate() {
        let cell = cell.trim();
        let value: f64 = cell.parse().map_err(|_| {
            Failure::usage(format!(
                "--mu0 entry {}: could not parse {cell:?} as a number",
                i + 1
            ))
        })?;
        entries.push(value);
    }
    if entries.len() != m {
        return Err(Failure::usage(format!(
            "--mu0 has {} entries but the data has dimension {m}",
            entries.len()
        )));
    }
    Ok(DVector::from_vec(entries))
}

/// A scalar (σ²·I) or a path to an m×m CSV matrix.
fn parse_sigma0(flag: &str, m: usize) -> Result<DMatrix<f64>, Failure> {
    if let Ok(scalar) = flag.parse::<f64>() {
        return Ok(DMatrix::identity(m, m) * scalar);
    }
    csv::read_square_matrix(flag, m)
}
