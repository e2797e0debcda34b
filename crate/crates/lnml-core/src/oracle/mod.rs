//! Independent brute-force oracles: adaptive quadrature, importance-sampled
//! Monte Carlo, and derivative-free maximization of f·π.
//!
//! The point of this module is to check the closed forms without trusting
//! them, so the integrands and objectives here are *direct transcriptions*
//! of the defining formulas — the capacity integrand is the reduction
//!
//! ```text
//!   C(ℳⁿ) = (2πe)^{−m(ν+n)/2} ∫ |Σ̄ₙ(x^n)|^{−(ν+n)/2} dx^n
//! ```
//!
//! with Σ̄ₙ re-derived locally from its displayed formula, not imported from
//! the estimation module. The Monte Carlo path even carries its own
//! Stirling-series log-gamma so that a defect in the main Lanczos
//! implementation cannot cancel out of the comparison.
//!
//! Every oracle is deterministic: quadrature from its spec, Monte Carlo
//! from its seed.

mod maximize;
mod mc;
mod quad;

pub use maximize::{maximize_f_pi, FPiMaximum};
pub use mc::{mc_capacity, mc_lnml_normalization, McEstimate};
pub use quad::{quad_capacity_1d, quad_lnml_normalization_1d};

use crate::error::{LnmlError, Result};

/// Controls for the adaptive quadrature oracle.
///
/// The window half-width is in units of the first predictive scale; it
/// bounds only the *centrally* integrated region — the two tails beyond it
/// are folded onto a finite interval by an exact algebraic substitution
/// (see [`quad`] internals) and integrated there, so heavy t tails cost
/// accuracy nothing. The window must still cover at least 10 predictive
/// scales so the central adaptive pass sees the whole body of the mass.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Central window half-width, in predictive scales. Must be ≥ 10.
    pub half_width_scales: f64,
    /// Absolute tolerance on each 1-D integral.
    pub abs_tol: f64,
    /// Relative tolerance on each 1-D integral.
    pub rel_tol: f64,
    /// Panel budget per 1-D integral before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { half_width_scales: 12.0, abs_tol: 1e-12, rel_tol: 1e-8, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    /// Check the documented invariants (window ≥ 10 scales, positive
    /// tolerances, a workable panel budget).
    pub fn validate(&self) -> Result<()> {
        if !self.half_width_scales.is_finite() || self.half_width_scales < 10.0 {
            return Err(LnmlError::InvalidConfig(format!(
                "half_width_scales must cover ≥ 10 predictive scales, got {}",
                self.half_width_scales
            )));
        }
        if !self.abs_tol.is_finite() || self.abs_tol <= 0.0 {
            return Err(LnmlError::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !self.rel_tol.is_finite() || self.rel_tol <= 0.0 {
            return Err(LnmlError::InvalidConfig(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions < 16 {
            return Err(LnmlError::InvalidConfig(format!(
                "max_subdivisions must be ≥ 16, got {}",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}
