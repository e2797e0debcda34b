//! Log-domain special functions: univariate and multivariate log-gamma.
//!
//! Every downstream formula (capacity, LNML density, multivariate-t
//! predictives) consumes only ln Γ, never Γ itself — quantities like
//! (n+ν)^{n+ν} overflow `f64` long before n gets interesting, so the whole
//! public surface of this crate stays in the natural-log domain and nothing
//! here ever exponentiates.
//!
//! | function | definition |
//! |----------|------------|
//! | [`log_gamma`] | ln Γ(z), z > 0 |
//! | [`log_multigamma`] | ln Γ_m(z) = (m(m−1)/4)·ln π + Σ_{j=0}^{m−1} ln Γ(z − j/2), z > (m−1)/2 |

use crate::error::{LnmlError, Result};

/// Lanczos coefficients for g = 7, n = 9 (Godfrey's set, the one used by
/// Boost and CPython). Gives |relative error| below 1e-13 across the
/// supported range once the z < 0.5 recurrence is applied.
const LANCZOS_G: f64 = 7.0;
// Published full-precision digits; the compiler rounds them to nearest.
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFICIENTS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

#[allow(clippy::excessive_precision)]
const HALF_LOG_TWO_PI: f64 = 0.918_938_533_204_672_74; // ln(2π)/2

/// Natural log of the gamma function, ln Γ(z), for z > 0.
///
/// Uses the Lanczos approximation for z ≥ 0.5 and the recurrence
/// ln Γ(z) = ln Γ(z+1) − ln z below that, so small arguments lose no
/// precision to reflection. Relative error stays below 1e-12 for
/// z ∈ [1e-3, 1e6] (checked against 50-digit references in the tests).
///
/// # Errors
///
/// [`LnmlError::Domain`] if z ≤ 0 or z is not finite.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(LnmlError::Domain(format!(
            "log_gamma requires z > 0, got z = {z}"
        )));
    }
    Ok(log_gamma_unchecked(z))
}

fn log_gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        // ln Γ(z) = ln Γ(z + 1) − ln z
        return log_gamma_unchecked(z + 1.0) - z.ln();
    }
    let zm1 = z - 1.0;
    let mut series = LANCZOS_COEFFICIENTS[0];
    for (i, &c) in LANCZOS_COEFFICIENTS.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LOG_TWO_PI + (zm1 + 0.5) * t.ln() - t + series.ln()
}

/// Natural log of the multivariate gamma function,
/// ln Γ_m(z) = (m(m−1)/4)·ln π + Σ_{j=0}^{m−1} ln Γ(z − j/2),
/// for z > (m−1)/2.
///
/// Γ_m is the normalizer that appears in Wishart-type integrals; the
/// capacity and the closed-form LNML density both use it at z = ν/2 and
/// z = (n+ν)/2. For m = 1 this is exactly [`log_gamma`] (bit-for-bit:
/// the π prefactor vanishes and the sum has a single term).
///
/// # Errors
///
/// [`LnmlError::Domain`] if m = 0, z ≤ (m−1)/2, or z is not finite.
pub fn log_multigamma(m: usize, z: f64) -> Result<f64> {
    if m == 0 {
        return Err(LnmlError::Domain(
            "log_multigamma requires m ≥ 1, got m = 0".to_string(),
        ));
    }
    let barrier = (m as f64 - 1.0) / 2.0;
    if !z.is_finite() || z <= barrier {
        return Err(LnmlError::Domain(format!(
            "log_multigamma requires z > (m−1)/2 = {barrier}, got z = {z} (m = {m})"
        )));
    }
    let mut acc = (m * (m - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 0..m {
        acc += log_gamma_unchecked(z - j as f64 / 2.0);
    }
    Ok(acc)
}
