//! Exact luckiness-normalized-maximum-likelihood (LNML) coding for
//! multivariate normal models.
//!
//! The model class is the full multivariate Gaussian family on ℝ^m with both
//! mean μ and covariance Σ ≻ 0 unknown. Plain normalized maximum likelihood
//! is improper for this class (the normalizer diverges), so the maximized
//! likelihood is tilted by a *luckiness* weight π(μ, Σ) of
//! normal–inverse-Wishart shape, parameterized by [`LuckinessParams`]
//! (ν, μ₀, Σ₀, ρ²). The resulting LNML density
//!
//! ```text
//!   p̄ₙ(x^n) = max_{μ,Σ} f(x^n; μ, Σ) π(μ, Σ)  /  C(ℳⁿ)
//! ```
//!
//! is proper, has a closed form, and its normalizer C(ℳⁿ) — the *capacity* —
//! is the constant value of the maximal tilted regret, making p̄ₙ the unique
//! minimax-regret code for the class.
//!
//! # Module map
//!
//! | module | contents |
//! |--------|----------|
//! | [`special`] | log-gamma and multivariate log-gamma (all log-domain) |
//! | [`model`] | observation/parameter types, Gaussian density f, luckiness π |
//! | [`estimate`] | MAP estimates (μ̄ₙ, Σ̄ₙ): batch closed form + streaming recursion |
//! | [`capacity`] | closed-form log-capacity ln C(ℳⁿ) |
//! | [`code`] | LNML log-density (closed + ratio forms), code lengths, tilted regret |
//! | [`sequential`] | per-observation multivariate-t predictives; streaming coder |
//! | [`detect`] | MDL change-point detection with LNML segment costs |
//! | [`oracle`] | independent brute-force checks: quadrature, Monte Carlo, maximization |
//!
//! All public numeric surfaces are natural-log domain; nothing exponentiates
//! internally except the oracles, whose whole point is to integrate real
//! densities. Code lengths are nats internally; bits are a display conversion.
//!
//! # Example
//!
//! ```
//! use lnml_core::{LuckinessParams, ObservationMatrix, lnml_report};
//! use nalgebra::{DMatrix, DVector};
//!
//! let lp = LuckinessParams::new(1.0, DVector::from_element(1, 0.0),
//!                               DMatrix::identity(1, 1), 1.0).unwrap();
//! let x = ObservationMatrix::from_rows(&[DVector::from_element(1, 0.0)]).unwrap();
//! let report = lnml_report(&x, &lp).unwrap();
//! // One standard-normal-scale point costs about 1.49 nats to encode.
//! assert!((report.code_length.nats - 1.491_303_476_129_372_8).abs() < 1e-12);
//! ```

pub mod capacity;
pub mod code;
pub mod detect;
pub mod error;
pub mod estimate;
pub mod model;
pub mod oracle;
pub mod sequential;
pub mod special;

pub use capacity::{log_capacity_general, log_capacity_simple};
pub use code::{lnml_report, log_lnml_closed, log_lnml_ratio, tilted_regret, CodeLength, LnmlReport};
pub use detect::{
    detect_multi_change, detect_single_change, segment_cost, SegmentCosts, Segmentation,
};
pub use error::{LnmlError, Result};
pub use estimate::{map_batch, map_stream_update, MapEstimate};
pub use model::{
    default_luckiness, log_density_f, log_luckiness_pi, GaussParams, LuckinessParams,
    ObservationMatrix, SuffStats,
};
pub use oracle::{
    maximize_f_pi, mc_capacity, mc_lnml_normalization, quad_capacity_1d,
    quad_lnml_normalization_1d, FPiMaximum, McEstimate, QuadratureSpec,
};
pub use sequential::{log_mvt_pdf, CoderState, PredictiveT};
pub use special::{log_gamma, log_multigamma};
