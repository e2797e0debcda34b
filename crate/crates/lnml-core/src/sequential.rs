//! Sequential decomposition of the LNML density into one-step multivariate-t
//! predictives:
//!
//! ```text
//!   p̄ₙ(x^n) = ∏_{i=1}^{n}  t_{ν−m+i}( xᵢ | μ̄ᵢ₋₁, cᵢ·Σ̄ᵢ₋₁ ),
//!   cᵢ = (ρ²ν+i)(ν+i−1) / ((ρ²ν+i−1)(ν−m+i))
//! ```
//!
//! The i-th factor depends only on the first i observations — not on the
//! horizon n — so the factors define an exchangeable stochastic process and
//! the coder can emit per-observation code lengths online. Summing them
//! reproduces the batch code length exactly (this identity is the sharpest
//! cross-check in the whole crate and is enforced by the tests).
//!
//! The degrees of freedom ν−m+i can be below 1 when ν sits barely above its
//! m−1 floor: the t density is still proper — low-order moments may not
//! exist, but only densities are ever used here.

use nalgebra::{DMatrix, DVector};

use crate::error::{LnmlError, Result};
use crate::estimate::{map_stream_update, MapEstimate};
use crate::model::{cholesky, log_det, LuckinessParams};
use crate::special::log_gamma;

/// Parameters of one multivariate-t predictive: dof ν−m+i, location μ̄ᵢ₋₁,
/// scale cᵢ·Σ̄ᵢ₋₁.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveT {
    dof: f64,
    location: DVector<f64>,
    scale: DMatrix<f64>,
}

impl PredictiveT {
    /// Validate (dof > 0, scale symmetric positive definite) and construct.
    pub fn new(dof: f64, location: DVector<f64>, scale: DMatrix<f64>) -> Result<Self> {
        if !dof.is_finite() || dof <= 0.0 {
            return Err(LnmlError::Domain(format!("dof must be positive, got {dof}")));
        }
        if scale.nrows() != location.len() || scale.ncols() != location.len() {
            return Err(LnmlError::DimensionMismatch(format!(
                "scale is {}×{}, expected {m}×{m}",
                scale.nrows(),
                scale.ncols(),
                m = location.len()
            )));
        }
        cholesky(&scale, "predictive scale")?;
        Ok(Self { dof, location, scale })
    }

    /// Degrees of freedom.
    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// Location vector.
    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    /// Scale matrix.
    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    /// Dimension m.
    pub fn m(&self) -> usize {
        self.location.len()
    }
}

/// Log-density of the multivariate t-distribution:
///
/// ```text
///   ln t_d(x | μ, S) = ln Γ((d+m)/2) − ln Γ(d/2) − (m/2)·ln(dπ)
///                      − (1/2)·ln|S| − ((d+m)/2)·ln[1 + (x−μ)ᵀS⁻¹(x−μ)/d]
/// ```
///
/// Integrates to 1 over ℝ^m for every d > 0.
pub fn log_mvt_pdf(x: &DVector<f64>, p: &PredictiveT) -> Result<f64> {
    if x.len() != p.m() {
        return Err(LnmlError::DimensionMismatch(format!(
            "x has dimension {}, predictive has {}",
            x.len(),
            p.m()
        )));
    }
    let m = p.m() as f64;
    let d = p.dof;
    let chol = cholesky(&p.scale, "predictive scale")?;
    let diff = x - &p.location;
    let z = chol.l_dirty().solve_lower_triangular(&diff).ok_or_else(|| {
        LnmlError::NotPositiveDefinite("predictive scale: singular factor".to_string())
    })?;
    let quad = z.norm_squared();
    Ok(log_gamma((d + m) / 2.0)? - log_gamma(d / 2.0)?
        - m / 2.0 * (d * std::f64::consts::PI).ln()
        - 0.5 * log_det(&chol)
        - (d + m) / 2.0 * (quad / d).ln_1p())
}

/// Streaming LNML coder. Holds the luckiness, the MAP estimate of the
/// prefix seen so far, and the accumulated code length.
///
/// The state is exclusively owned by one stream: [`CoderState::step`]
/// mutates in place. Step order matters and matches the product's indexing:
/// the i-th observation is scored against the prefix of length i−1 *first*,
/// then folded into the MAP.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderState {
    lp: LuckinessParams,
    map: MapEstimate,
    accumulated_nats: f64,
}

impl CoderState {
    /// Fresh coder: prefix length 0, MAP = (μ₀, Σ₀), zero accumulated nats.
    pub fn new(lp: LuckinessParams) -> Self {
        let map = MapEstimate::initial(&lp);
        Self { lp, map, accumulated_nats: 0.0 }
    }

    /// Parameters of the predictive for the *next* observation
    /// (index i = observed() + 1):
    /// dof = ν−m+i, location = μ̄ᵢ₋₁, scale = cᵢ·Σ̄ᵢ₋₁.
    pub fn predictive_params(&self) -> Result<PredictiveT> {
        let i = (self.map.n() + 1) as f64;
        let m = self.lp.m() as f64;
        let nu = self.lp.nu();
        let rho2nu = self.lp.rho2() * nu;
        let dof = nu - m + i;
        let c = (rho2nu + i) * (nu + i - 1.0) / ((rho2nu + i - 1.0) * dof);
        PredictiveT::new(dof, self.map.mu_bar().clone(), self.map.sigma_bar() * c)
    }

    /// Score one observation against the current predictive, then fold it
    /// into the MAP. Returns the per-point code length in nats (signed:
    /// densities above 1 give negative lengths).
    pub fn step(&mut self, x: &DVector<f64>) -> Result<f64> {
        let predictive = self.predictive_params()?;
        let nats = -log_mvt_pdf(x, &predictive)?;
        self.map = map_stream_update(&self.map, x, &self.lp)?;
        self.accumulated_nats += nats;
        Ok(nats)
    }

    /// Total accumulated code length in nats.
    pub fn accumulated_nats(&self) -> f64 {
        self.accumulated_nats
    }

    /// Number of observations folded in so far.
    pub fn observed(&self) -> usize {
        self.map.n()
    }

    /// The MAP estimate of the observed prefix.
    pub fn map(&self) -> &MapEstimate {
        &self.map
    }

    /// The luckiness this coder codes against.
    pub fn lp(&self) -> &LuckinessParams {
        &self.lp
    }
}
