//! Closed-form log-capacity ln C(ℳⁿ) — the LNML normalizing constant
//! ∫ max_{μ,Σ} f(x^n; μ, Σ)·π(μ, Σ) dx^n, and simultaneously the constant
//! value of the maximal tilted regret.
//!
//! For the simple luckiness (μ₀ = 0, Σ₀ = σ²I):
//!
//! ```text
//!   C(m, n, ν, σ², ρ²) = σ^{−mν} · [ (n+ν)^{n+ν} (1 + n/(ρ²ν))
//!                                    / ((2e)^{n+ν} (πν)^ν) ]^{m/2}
//!                        · Γ_m(ν/2) / Γ_m((n+ν)/2)
//! ```
//!
//! The general location/scale luckiness has the same capacity with
//! σ² ← |Σ₀|^{1/m}; μ₀ drops out entirely (an affine change of coordinates
//! shifts the data but not the normalizer).
//!
//! Everything is evaluated in the log domain: (n+ν)^{n+ν} at n = 10⁶ has no
//! floating-point representation, but (n+ν)·ln(n+ν) is a perfectly ordinary
//! number.

use crate::error::{LnmlError, Result};
use crate::model::LuckinessParams;
use crate::special::log_multigamma;

/// Shared core: ln C with the scale supplied as ln σ², so the general form
/// can pass (1/m)·ln|Σ₀| without ever exponentiating the determinant.
fn log_capacity_with_log_sigma2(
    m: usize,
    n: usize,
    nu: f64,
    log_sigma2: f64,
    rho2: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(LnmlError::Domain(
            "capacity is defined for n ≥ 1 (the empty-prefix case belongs to the sequential coder)"
                .to_string(),
        ));
    }
    let mf = m as f64;
    let nf = n as f64;
    if !nu.is_finite() || nu <= mf - 1.0 {
        return Err(LnmlError::Domain(format!(
            "nu must exceed m−1 = {}, got nu = {nu}",
            mf - 1.0
        )));
    }
    if !rho2.is_finite() || rho2 <= 0.0 {
        return Err(LnmlError::Domain(format!("rho2 must be positive, got {rho2}")));
    }
    let npnu = nf + nu;
    // (2e)^{n+ν} in the log domain is (n+ν)(1 + ln 2); ln(1 + n/(ρ²ν)) uses
    // ln_1p so large ρ²ν loses nothing to cancellation.
    let bracket = npnu * npnu.ln()
        - npnu * (1.0 + std::f64::consts::LN_2)
        - nu * (std::f64::consts::PI * nu).ln()
        + (nf / (rho2 * nu)).ln_1p();
    Ok(-mf * nu / 2.0 * log_sigma2
        + mf / 2.0 * bracket
        + log_multigamma(m, nu / 2.0)?
        - log_multigamma(m, npnu / 2.0)?)
}

/// ln C(m, n, ν, σ², ρ²) for the simple luckiness (μ₀ = 0, Σ₀ = σ²I).
///
/// # Errors
///
/// [`LnmlError::Domain`] if n = 0, ν ≤ m−1, σ² ≤ 0, or ρ² ≤ 0.
pub fn log_capacity_simple(m: usize, n: usize, nu: f64, sigma2: f64, rho2: f64) -> Result<f64> {
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(LnmlError::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    log_capacity_with_log_sigma2(m, n, nu, sigma2.ln(), rho2)
}

/// ln C(ℳⁿ) for a general location/scale luckiness: the simple capacity
/// with σ² replaced by |Σ₀|^{1/m}. Independent of μ₀.
///
/// # Errors
///
/// [`LnmlError::Domain`] if n = 0 (the luckiness itself was validated at
/// construction).
pub fn log_capacity_general(m: usize, n: usize, lp: &LuckinessParams) -> Result<f64> {
    if m != lp.m() {
        return Err(LnmlError::DimensionMismatch(format!(
            "capacity for dimension {m}, luckiness has {}",
            lp.m()
        )));
    }
    log_capacity_with_log_sigma2(m, n, lp.nu(), lp.log_det_sigma0() / m as f64, lp.rho2())
}
