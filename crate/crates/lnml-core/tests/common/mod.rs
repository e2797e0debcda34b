//! Shared helpers for the integration suites: the one-line acceptance
//! reporter, deterministic RNG plumbing, and random problem generators.
//!
//! Every generator takes the RNG explicitly so each test owns one seeded
//! stream and reruns are bit-identical.

// Each integration target compiles its own copy and uses a subset.
#![allow(dead_code)]

use lnml_core::{LuckinessParams, ObservationMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Deterministic RNG, keyed per test so suites don't share streams.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Print the verdict line for one acceptance criterion, then enforce it.
/// `detail` lands on the line either way: measured errors, counts, timing.
pub fn criterion_line(number: u32, label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number:02} {label}: {verdict} ({detail})");
    assert!(pass, "criterion {number:02} {label}: FAIL ({detail})");
}

/// Uniform draw in [lo, hi).
pub fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// One standard-normal draw.
pub fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random symmetric positive-definite m×m matrix: AAᵀ + floor·I with A
/// entries uniform in [−1, 1), so the spectrum is bounded below by `floor`.
pub fn random_spd(m: usize, floor: f64, rng: &mut ChaCha12Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| uniform(rng, -1.0, 1.0));
    &a * a.transpose() + DMatrix::identity(m, m) * floor
}

/// Random invertible m×m matrix, redrawn until |det| ≥ 0.1 so the inverse
/// and ln|det| are well-scaled.
pub fn random_invertible(m: usize, rng: &mut ChaCha12Rng) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(m, m, |_, _| uniform(rng, -1.5, 1.5));
        if a.determinant().abs() >= 0.1 {
            return a;
        }
    }
}

/// Random valid luckiness parameters at desk scale: ν bounded away from the
/// Γ_m pole (ν > m−1), O(1) prior scales, ρ² in [0.3, 3).
pub fn random_luckiness(m: usize, rng: &mut ChaCha12Rng) -> LuckinessParams {
    let nu = uniform(rng, m as f64 - 1.0 + 0.4, m as f64 + 3.0);
    let mu0 = DVector::from_fn(m, |_, _| uniform(rng, -2.0, 2.0));
    let sigma0 = random_spd(m, 0.3, rng);
    let rho2 = uniform(rng, 0.3, 3.0);
    LuckinessParams::new(nu, mu0, sigma0, rho2).expect("generated parameters are valid")
}

/// Scalar (m = 1) luckiness from plain numbers.
pub fn scalar_luckiness(nu: f64, mu0: f64, sigma2: f64, rho2: f64) -> LuckinessParams {
    LuckinessParams::new(
        nu,
        DVector::from_element(1, mu0),
        DMatrix::from_element(1, 1, sigma2),
        rho2,
    )
    .expect("scalar parameters are valid")
}

/// n observations from N(c, spread²·I) with the center c itself drawn
/// uniformly from [−spread, spread)^m.
pub fn random_observations(
    m: usize,
    n: usize,
    spread: f64,
    rng: &mut ChaCha12Rng,
) -> ObservationMatrix {
    let center = DVector::from_fn(m, |_, _| uniform(rng, -spread, spread));
    let rows: Vec<DVector<f64>> = (0..n)
        .map(|_| DVector::from_fn(m, |i, _| center[i] + spread * standard_normal(rng)))
        .collect();
    ObservationMatrix::from_rows(&rows).expect("generated observations are valid")
}

/// In-place Fisher–Yates shuffle of index order 0..n.
pub fn random_permutation(n: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    order
}
