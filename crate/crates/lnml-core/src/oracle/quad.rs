//! Globally adaptive Gauss–Kronrod quadrature over the real line, plus the
//! univariate capacity and normalization integrals built on it.
//!
//! The engine is a worst-panel-first G7/K15 scheme: every panel carries a
//! 15-point Kronrod value and the |K15 − G7| error bound, the panel with the
//! largest bound is bisected until the summed bound meets the tolerance.
//! Real-line integrals split into a central window plus two tails that are
//! folded onto (0, 1] by the exact substitution x = c ± w·v⁻⁴ (Jacobian
//! 4w·v⁻⁵), which turns any algebraic tail |x|^{−p}, p > 1, into the bounded
//! smooth factor v^{4p−5} — no truncation error, however heavy the tail.

use std::collections::BinaryHeap;

use super::QuadratureSpec;
use crate::code::log_lnml_closed;
use crate::error::{LnmlError, Result};
use crate::model::{LuckinessParams, SuffStats, LOG_TWO_PI};

use nalgebra::DVector;

// 7-point Gauss / 15-point Kronrod pair on [-1, 1]: positive abscissae in
// descending order (index 7 is the midpoint), Kronrod weights aligned with
// them, and the four Gauss weights for abscissae 1, 3, 5 and the midpoint.
// The tables keep the published 18-digit values; the compiler rounds each
// to the nearest f64.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_524,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

/// Inner integrals of a nested (per-axis) pass run this much tighter than
/// the level above, so the outer error estimate dominates the total.
const INNER_TOL_SHRINK: f64 = 0.02;

/// Nested shrinking stops here: below ~1e-13 relative, panel sums are
/// rounding-noise and tighter targets only burn subdivisions.
const MIN_REL_TOL: f64 = 1e-13;

/// Beyond this coordinate magnitude every integrand here underflows f64;
/// evaluating the formulas there risks inf − inf, so short-circuit to zero.
const HUGE_COORDINATE: f64 = 1e100;

type Integrand<'a> = dyn FnMut(f64) -> Result<f64> + 'a;

/// One G7/K15 evaluation on [lo, hi]: returns (K15 value, |K15 − G7|).
fn gk15(f: &mut Integrand<'_>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);
    let fc = f(mid)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&node, &wk)) in XGK.iter().zip(WGK.iter()).enumerate().take(7) {
        let dx = half * node;
        let pair = f(mid - dx)? + f(mid + dx)?;
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(LnmlError::NonFinite(format!(
            "quadrature panel [{lo:e}, {hi:e}] evaluated to a non-finite sum"
        )));
    }
    Ok((value, ((kronrod - gauss) * half).abs()))
}

#[derive(Debug)]
struct Panel {
    err: f64,
    value: f64,
    lo: f64,
    hi: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive quadrature on a finite interval: bisect the panel with
/// the worst error bound until the summed bound drops under
/// max(abs_tol, rel_tol · |integral|) or the split budget runs out.
fn adaptive(
    f: &mut Integrand<'_>,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    // Panels narrower than ~2⁻⁴⁵ of the original interval are at the point
    // where bisection only shuffles rounding noise; they are set aside with
    // their error bound kept on the books.
    let width_floor = (hi - lo) * 2f64.powi(-45);
    let (value, err) = gk15(f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { err, value, lo, hi });
    let mut frozen_value = 0.0;
    let mut value_sum = value;
    let mut err_sum = err;
    let mut splits = 0usize;
    while err_sum > abs_tol.max(rel_tol * value_sum.abs()) {
        let Some(worst) = heap.pop() else {
            return Err(LnmlError::NoConvergence(format!(
                "quadrature on [{lo:e}, {hi:e}] stalled at estimated error {err_sum:.3e} \
                 with every panel at the width floor"
            )));
        };
        if worst.hi - worst.lo <= width_floor {
            frozen_value += worst.value;
            continue;
        }
        if splits >= max_subdivisions {
            return Err(LnmlError::NoConvergence(format!(
                "quadrature on [{lo:e}, {hi:e}] used all {max_subdivisions} subdivisions, \
                 estimated error still {err_sum:.3e}"
            )));
        }
        splits += 1;
        let mid = 0.5 * (worst.lo + worst.hi);
        let (lv, le) = gk15(f, worst.lo, mid)?;
        let (rv, re) = gk15(f, mid, worst.hi)?;
        value_sum += lv + rv - worst.value;
        err_sum += le + re - worst.err;
        heap.push(Panel { err: le, value: lv, lo: worst.lo, hi: mid });
        heap.push(Panel { err: re, value: rv, lo: mid, hi: worst.hi });
    }
    // Re-add the panel values in one pass: the running sum above accumulates
    // cancellation drift over many splice updates.
    Ok(frozen_value + heap.iter().map(|p| p.value).sum::<f64>())
}

/// Integral of `f` over the whole real line: a central window of
/// `spec.half_width_scales` scales around `center`, plus both tails folded
/// exactly onto (0, 1]. Each piece gets a third of the error budget.
fn integrate_real_line(
    f: &mut Integrand<'_>,
    center: f64,
    scale: f64,
    abs_tol: f64,
    rel_tol: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let w = spec.half_width_scales * scale;
    let (piece_abs, piece_rel) = (abs_tol / 3.0, rel_tol / 3.0);
    let central = adaptive(f, center - w, center + w, piece_abs, piece_rel, spec.max_subdivisions)?;
    let mut upper_tail = |v: f64| -> Result<f64> {
        let v4 = 1.0 / (v * v * v * v);
        let jacobian = 4.0 * w * v4 / v;
        if !jacobian.is_finite() {
            // x would exceed ~1e300 here; the integrand underflowed long ago.
            return Ok(0.0);
        }
        Ok(f(center + w * v4)? * jacobian)
    };
    let upper = adaptive(&mut upper_tail, 0.0, 1.0, piece_abs, piece_rel, spec.max_subdivisions)?;
    let mut lower_tail = |v: f64| -> Result<f64> {
        let v4 = 1.0 / (v * v * v * v);
        let jacobian = 4.0 * w * v4 / v;
        if !jacobian.is_finite() {
            return Ok(0.0);
        }
        Ok(f(center - w * v4)? * jacobian)
    };
    let lower = adaptive(&mut lower_tail, 0.0, 1.0, piece_abs, piece_rel, spec.max_subdivisions)?;
    Ok(central + upper + lower)
}

/// Direct transcription of the reduced capacity integrand for m = 1:
/// (2πe)^{−(ν+n)/2} · σ̄ₙ(x)^{−(ν+n)/2} with σ̄ₙ written out from its
/// batch formula. Nothing here calls the estimation or capacity modules.
struct ScalarCapacityIntegrand {
    n: usize,
    nu: f64,
    mu0: f64,
    sigma0: f64,
    rho2: f64,
    log_prefactor: f64,
    half_exponent: f64,
}

impl ScalarCapacityIntegrand {
    fn new(n: usize, lp: &LuckinessParams) -> Self {
        let nu = lp.nu();
        let npnu = n as f64 + nu;
        Self {
            n,
            nu,
            mu0: lp.mu0()[0],
            sigma0: lp.sigma0()[(0, 0)],
            rho2: lp.rho2(),
            log_prefactor: -0.5 * npnu * (LOG_TWO_PI + 1.0),
            half_exponent: 0.5 * npnu,
        }
    }

    fn sigma_bar(&self, xs: &[f64]) -> f64 {
        let mut t = 0.0;
        let mut s = 0.0;
        for &x in xs {
            let d = x - self.mu0;
            t += d;
            s += d * d;
        }
        let npnu = self.n as f64 + self.nu;
        (s + self.nu * self.sigma0) / npnu
            - t * t / (npnu * (self.rho2 * self.nu + self.n as f64))
    }

    fn eval(&self, xs: &[f64]) -> f64 {
        let sigma_bar = self.sigma_bar(xs);
        if !sigma_bar.is_finite() {
            // The moment sums have overflowed; the true σ̄ is astronomically
            // large and the integrand underflows to zero.
            return 0.0;
        }
        (self.log_prefactor - self.half_exponent * sigma_bar.ln()).exp()
    }

    /// Window placement for the axis at `depth`, given the fixed prefix and
    /// k = n − depth coordinates still free (the current one included).
    ///
    /// With all k free coordinates at a common value r, σ̄ₙ is minimized at
    /// the ridge r = μ₀ + t_pre/(ρ²ν + n − k), and the profile over the
    /// current coordinate (remaining ones re-minimized) curves as
    /// σ̄ = σ̄_min + κ δ² with κ = (q−k)/((q−k+1)(n+ν)), q = ρ²ν + n. The
    /// axis integrand is then a t bump of scale² ≈ σ̄_min/(κ(ν + n − k))
    /// around the ridge. Centering the window there matters: pinned at μ₀,
    /// a prefix far out in a tail pushes the ridge deep into the folded
    /// tail piece, where its narrow image can slip between the initial
    /// Kronrod nodes and silently lose mass. Placement affects only where
    /// the adaptive pass looks, never the value being integrated.
    fn window(&self, prefix: &[f64]) -> (f64, f64) {
        let k = (self.n - prefix.len()) as f64;
        let t_pre: f64 = prefix.iter().map(|x| x - self.mu0).sum();
        let q = self.rho2 * self.nu + self.n as f64;
        let ridge = self.mu0 + t_pre / (q - k);
        let mut probe = [0.0; 3];
        probe[..prefix.len()].copy_from_slice(prefix);
        probe[prefix.len()..self.n].fill(ridge);
        let sigma_min = self.sigma_bar(&probe[..self.n]);
        let npnu = self.n as f64 + self.nu;
        let kappa = (q - k) / ((q - k + 1.0) * npnu);
        let scale = (sigma_min / (kappa * (npnu - k))).sqrt();
        (ridge, scale)
    }
}

/// Window placement for the LNML density's next axis given `prefix` fixed
/// points: the predictive location μ̄ᵢ = μ₀ + t/(i + ρ²ν) and scale
/// √(cᵢ₊₁ σ̄ᵢ) with cᵢ₊₁ = (ρ²ν+i+1)/(ρ²ν+i) for m = 1, both written out
/// from the batch formulas. As with the capacity windows, this only points
/// the adaptive pass at where the conditional mass sits.
fn predictive_window(prefix: &[f64], lp: &LuckinessParams) -> (f64, f64) {
    let nu = lp.nu();
    let rho2nu = lp.rho2() * nu;
    let mu0 = lp.mu0()[0];
    let i = prefix.len() as f64;
    let mut t = 0.0;
    let mut s = 0.0;
    for &x in prefix {
        let d = x - mu0;
        t += d;
        s += d * d;
    }
    let center = mu0 + t / (i + rho2nu);
    let sigma_bar =
        (s + nu * lp.sigma0()[(0, 0)]) / (i + nu) - t * t / ((nu + i) * (rho2nu + i));
    let c_next = (rho2nu + i + 1.0) / (rho2nu + i);
    (center, (c_next * sigma_bar).sqrt())
}

fn capacity_axis(
    p: &ScalarCapacityIntegrand,
    prefix: [f64; 3],
    depth: usize,
    abs_tol: f64,
    rel_tol: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (center, scale) = p.window(&prefix[..depth]);
    let mut f = |x: f64| -> Result<f64> {
        let mut xs = prefix;
        xs[depth] = x;
        if depth + 1 == p.n {
            Ok(p.eval(&xs[..p.n]))
        } else {
            // Inner levels get no absolute budget: an absolute error slipped
            // in under a tail fold is multiplied by the fold's v⁻⁵ Jacobian
            // at the level above, while a relative error stays relative.
            capacity_axis(
                p,
                xs,
                depth + 1,
                0.0,
                (rel_tol * INNER_TOL_SHRINK).max(MIN_REL_TOL),
                spec,
            )
        }
    };
    integrate_real_line(&mut f, center, scale, abs_tol, rel_tol, spec)
}

/// Brute-force capacity for univariate models: integrates the maximized
/// tilted density over ℝⁿ by nested adaptive quadrature and returns the
/// capacity itself (not its log). Supports m = 1 and 1 ≤ n ≤ 3; the cost
/// grows roughly with the 1-D point count to the n-th power.
pub fn quad_capacity_1d(n: usize, lp: &LuckinessParams, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if lp.m() != 1 {
        return Err(LnmlError::Domain(format!(
            "quadrature capacity oracle is univariate, got m = {}",
            lp.m()
        )));
    }
    if n == 0 || n > 3 {
        return Err(LnmlError::Domain(format!(
            "quadrature capacity oracle covers 1 ≤ n ≤ 3, got n = {n}"
        )));
    }
    let p = ScalarCapacityIntegrand::new(n, lp);
    capacity_axis(&p, [0.0; 3], 0, spec.abs_tol, spec.rel_tol, spec)
}

/// The LNML density evaluated through the closed form, as a plain function
/// of the sample — the quantity whose integral the normalization oracle
/// checks against 1.
fn closed_form_density(xs: &[f64], lp: &LuckinessParams) -> Result<f64> {
    if xs.iter().any(|x| x.abs() > HUGE_COORDINATE) {
        // The density decays algebraically; at |x| ~ 1e100 it is far below
        // the smallest positive f64 while the moment sums would overflow.
        return Ok(0.0);
    }
    let mut stats = SuffStats::for_luckiness(lp);
    for &x in xs {
        stats.update(&DVector::from_element(1, x))?;
    }
    Ok(log_lnml_closed(&stats, lp)?.exp())
}

fn normalization_axis(
    n: usize,
    lp: &LuckinessParams,
    prefix: [f64; 2],
    depth: usize,
    abs_tol: f64,
    rel_tol: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (center, scale) = predictive_window(&prefix[..depth], lp);
    let mut f = |x: f64| -> Result<f64> {
        let mut xs = prefix;
        xs[depth] = x;
        if depth + 1 == n {
            closed_form_density(&xs[..n], lp)
        } else {
            // No absolute budget below the root — see capacity_axis.
            normalization_axis(
                n,
                lp,
                xs,
                depth + 1,
                0.0,
                (rel_tol * INNER_TOL_SHRINK).max(MIN_REL_TOL),
                spec,
            )
        }
    };
    integrate_real_line(&mut f, center, scale, abs_tol, rel_tol, spec)
}

/// Integrates the closed-form LNML density over ℝⁿ (m = 1, n ∈ {1, 2}).
/// A correct implementation makes this ≈ 1; the returned value is the raw
/// integral so the caller sees the actual deviation.
pub fn quad_lnml_normalization_1d(
    n: usize,
    lp: &LuckinessParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if lp.m() != 1 {
        return Err(LnmlError::Domain(format!(
            "quadrature normalization oracle is univariate, got m = {}",
            lp.m()
        )));
    }
    if n == 0 || n > 2 {
        return Err(LnmlError::Domain(format!(
            "quadrature normalization oracle covers n ∈ {{1, 2}}, got n = {n}"
        )));
    }
    normalization_axis(n, lp, [0.0; 2], 0, spec.abs_tol, spec.rel_tol, spec)
}
