//! Core domain types and the two ingredients of the LNML numerator:
//! the Gaussian likelihood f(x^n; μ, Σ) and the luckiness weight π(μ, Σ).
//!
//! The luckiness is an unnormalized normal–inverse-Wishart-shaped tilt
//!
//! ```text
//!   ln π(μ, Σ) = −(mν/2)·ln(2π) − (ν/2)·ln|Σ|
//!                − (ν/2)·tr[Σ⁻¹(Σ₀ + ρ²(μ−μ₀)(μ−μ₀)ᵀ)]
//! ```
//!
//! with hyperparameters (ν, μ₀, Σ₀, ρ²) collected in [`LuckinessParams`].
//! Taking μ₀ = 0 and Σ₀ = σ²I recovers the simple location-free form; the
//! general form differs only by an affine change of coordinates.
//!
//! ρ² = 1 makes π conjugate to the Gaussian likelihood; other ρ² > 0 trade
//! how strongly the mean is shrunk toward μ₀ against the scale tilt.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{LnmlError, Result};

pub(crate) const LOG_TWO_PI: f64 = 1.837_877_066_409_345_6; // ln(2π)

/// Relative tolerance for the symmetry check on covariance-like inputs.
/// Matrices assembled by arithmetic (e.g. AΣAᵀ) are asymmetric at the
/// last-couple-of-ulps level; demanding bitwise symmetry would reject them.
const SYMMETRY_RTOL: f64 = 1e-10;

fn check_finite_vector(v: &DVector<f64>, what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LnmlError::NonFinite(format!("{what} has a non-finite entry")));
    }
    Ok(())
}

fn check_finite_matrix(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(LnmlError::NonFinite(format!("{what} has a non-finite entry")));
    }
    Ok(())
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let scale = m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                return Err(LnmlError::NotPositiveDefinite(format!(
                    "{what} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Cholesky-factor a symmetric positive definite matrix, mapping failure to
/// a descriptive error. No jitter, no perturbation: a silent regularization
/// would corrupt every code length downstream.
pub(crate) fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| {
        LnmlError::NotPositiveDefinite(format!("{what}: Cholesky factorization failed"))
    })
}

/// ln|M| of a symmetric positive definite matrix via its Cholesky factor.
pub(crate) fn log_det(chol: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// An n×m batch of observations: each row is one point x_i ∈ ℝ^m.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    data: DMatrix<f64>,
}

impl ObservationMatrix {
    /// Build from explicit rows. Requires at least one row (use
    /// [`ObservationMatrix::empty`] when the dimension is known but no data
    /// has arrived) and identical dimension across rows.
    pub fn from_rows(rows: &[DVector<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(LnmlError::Domain(
                "from_rows needs at least one row; use ObservationMatrix::empty(m) for n = 0"
                    .to_string(),
            ));
        };
        let m = first.len();
        if m == 0 {
            return Err(LnmlError::Domain("observation dimension must be ≥ 1".to_string()));
        }
        let mut data = DMatrix::zeros(rows.len(), m);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(LnmlError::DimensionMismatch(format!(
                    "row {i} has dimension {}, expected {m}",
                    r.len()
                )));
            }
            check_finite_vector(r, &format!("observation row {i}"))?;
            data.row_mut(i).tr_copy_from(r);
        }
        Ok(Self { data })
    }

    /// An empty batch of known dimension m ≥ 1.
    pub fn empty(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(LnmlError::Domain("observation dimension must be ≥ 1".to_string()));
        }
        Ok(Self { data: DMatrix::zeros(0, m) })
    }

    /// Wrap an n×m matrix whose rows are observations.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(LnmlError::Domain("observation dimension must be ≥ 1".to_string()));
        }
        check_finite_matrix(&data, "observation matrix")?;
        Ok(Self { data })
    }

    /// Number of observations n.
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Dimension m of each observation.
    pub fn m(&self) -> usize {
        self.data.ncols()
    }

    /// The i-th observation as an owned column vector.
    pub fn row_vec(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    /// Iterate over observations in order.
    pub fn iter_rows(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.n()).map(|i| self.row_vec(i))
    }

    /// The rows a..b as a new batch.
    pub fn slice_rows(&self, a: usize, b: usize) -> Result<Self> {
        if a > b || b > self.n() {
            return Err(LnmlError::Domain(format!(
                "row range [{a}, {b}) out of bounds for n = {}",
                self.n()
            )));
        }
        Ok(Self { data: self.data.rows(a, b - a).into_owned() })
    }

    /// Borrow the underlying n×m matrix.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Hyperparameters (ν, μ₀, Σ₀, ρ²) of the luckiness tilt.
///
/// Validity: ν > m−1 (so the tilt is integrable in Σ), Σ₀ symmetric positive
/// definite, ρ² > 0. Validation runs once at construction; every downstream
/// operation can then assume a well-formed value.
#[derive(Debug, Clone, PartialEq)]
pub struct LuckinessParams {
    nu: f64,
    mu0: DVector<f64>,
    sigma0: DMatrix<f64>,
    rho2: f64,
    /// ln|Σ₀|, cached from the validation Cholesky.
    log_det_sigma0: f64,
}

impl LuckinessParams {
    /// Validate and construct. The dimension m is taken from μ₀, which must
    /// match Σ₀.
    pub fn new(nu: f64, mu0: DVector<f64>, sigma0: DMatrix<f64>, rho2: f64) -> Result<Self> {
        let m = mu0.len();
        if m == 0 {
            return Err(LnmlError::Domain("luckiness dimension must be ≥ 1".to_string()));
        }
        if sigma0.nrows() != m || sigma0.ncols() != m {
            return Err(LnmlError::DimensionMismatch(format!(
                "sigma0 is {}×{}, expected {m}×{m}",
                sigma0.nrows(),
                sigma0.ncols()
            )));
        }
        if !nu.is_finite() || nu <= m as f64 - 1.0 {
            return Err(LnmlError::Domain(format!(
                "nu must exceed m−1 = {}, got nu = {nu}",
                m as f64 - 1.0
            )));
        }
        if !rho2.is_finite() || rho2 <= 0.0 {
            return Err(LnmlError::Domain(format!("rho2 must be positive, got {rho2}")));
        }
        check_finite_vector(&mu0, "mu0")?;
        check_finite_matrix(&sigma0, "sigma0")?;
        check_symmetric(&sigma0, "sigma0")?;
        let chol = cholesky(&sigma0, "sigma0")?;
        let log_det_sigma0 = log_det(&chol);
        Ok(Self { nu, mu0, sigma0, rho2, log_det_sigma0 })
    }

    /// Prior strength ν.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Location center μ₀.
    pub fn mu0(&self) -> &DVector<f64> {
        &self.mu0
    }

    /// Scale matrix Σ₀.
    pub fn sigma0(&self) -> &DMatrix<f64> {
        &self.sigma0
    }

    /// Mean-shrinkage strength ρ².
    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    /// Dimension m.
    pub fn m(&self) -> usize {
        self.mu0.len()
    }

    /// ln|Σ₀| (cached).
    pub fn log_det_sigma0(&self) -> f64 {
        self.log_det_sigma0
    }
}

/// A Gaussian parameter point (μ, Σ) with Σ ≻ 0 — the argument of the
/// density f and the luckiness π, and the container for MAP estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussParams {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussParams {
    /// Validate (finite, symmetric, positive definite) and construct.
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let m = mu.len();
        if m == 0 {
            return Err(LnmlError::Domain("parameter dimension must be ≥ 1".to_string()));
        }
        if sigma.nrows() != m || sigma.ncols() != m {
            return Err(LnmlError::DimensionMismatch(format!(
                "sigma is {}×{}, expected {m}×{m}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        check_finite_vector(&mu, "mu")?;
        check_finite_matrix(&sigma, "sigma")?;
        check_symmetric(&sigma, "sigma")?;
        cholesky(&sigma, "sigma")?;
        Ok(Self { mu, sigma })
    }

    /// Mean μ.
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// Covariance Σ.
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Dimension m.
    pub fn m(&self) -> usize {
        self.mu.len()
    }
}

/// Streaming sufficient statistics relative to a fixed center μ₀:
/// n, t = Σᵢ(xᵢ−μ₀), s = Σᵢ(xᵢ−μ₀)(xᵢ−μ₀)ᵀ.
///
/// Centered (rather than raw) moments are exactly the sums the MAP formulas
/// consume, and they keep s well conditioned when the data sit far from the
/// origin. A fresh n = 0 value is legal: it is the initial state of the
/// streaming coder.
///
/// [`SuffStats::update`] mutates in place; clone first if the previous state
/// is still needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    n: usize,
    t: DVector<f64>,
    s: DMatrix<f64>,
    center: DVector<f64>,
}

impl SuffStats {
    /// Empty statistics centered at μ₀.
    pub fn new(center: DVector<f64>) -> Result<Self> {
        let m = center.len();
        if m == 0 {
            return Err(LnmlError::Domain("center dimension must be ≥ 1".to_string()));
        }
        check_finite_vector(&center, "center")?;
        Ok(Self { n: 0, t: DVector::zeros(m), s: DMatrix::zeros(m, m), center })
    }

    /// Empty statistics centered at a luckiness' μ₀.
    pub fn for_luckiness(lp: &LuckinessParams) -> Self {
        // lp.mu0 is already validated finite and non-empty.
        Self::new(lp.mu0().clone()).expect("validated center")
    }

    /// Fold one observation in: n += 1, t += (x−μ₀), s += (x−μ₀)(x−μ₀)ᵀ.
    pub fn update(&mut self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.center.len() {
            return Err(LnmlError::DimensionMismatch(format!(
                "observation has dimension {}, stats expect {}",
                x.len(),
                self.center.len()
            )));
        }
        check_finite_vector(x, "observation")?;
        let d = x - &self.center;
        self.t += &d;
        // d·dᵀ is exactly symmetric in floating point (x[i]·x[j] = x[j]·x[i]
        // bitwise), so s stays symmetric under full rank-one updates.
        self.s.ger(1.0, &d, &d, 1.0);
        self.n += 1;
        Ok(())
    }

    /// Accumulate a whole batch (row order).
    pub fn from_observations(x: &ObservationMatrix, center: DVector<f64>) -> Result<Self> {
        let mut st = Self::new(center)?;
        if x.m() != st.center.len() {
            return Err(LnmlError::DimensionMismatch(format!(
                "observations have dimension {}, center has {}",
                x.m(),
                st.center.len()
            )));
        }
        for r in x.iter_rows() {
            st.update(&r)?;
        }
        Ok(st)
    }

    /// Statistics of the stream suffix between an earlier prefix state and
    /// this one: (self.n − earlier.n, self.t − earlier.t, self.s − earlier.s).
    /// Both operands must share a center, and `earlier` must really be a
    /// prefix (n no larger than this one's).
    pub fn difference(&self, earlier: &Self) -> Result<Self> {
        if self.center != earlier.center {
            return Err(LnmlError::DimensionMismatch(
                "suffstats difference requires identical centers".to_string(),
            ));
        }
        if earlier.n > self.n {
            return Err(LnmlError::Domain(format!(
                "suffstats difference: earlier.n = {} exceeds n = {}",
                earlier.n, self.n
            )));
        }
        Ok(Self {
            n: self.n - earlier.n,
            t: &self.t - &earlier.t,
            s: &self.s - &earlier.s,
            center: self.center.clone(),
        })
    }

    /// Count n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// t = Σᵢ(xᵢ−μ₀).
    pub fn t(&self) -> &DVector<f64> {
        &self.t
    }

    /// s = Σᵢ(xᵢ−μ₀)(xᵢ−μ₀)ᵀ.
    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// The center μ₀ the sums are taken against.
    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// Dimension m.
    pub fn m(&self) -> usize {
        self.center.len()
    }
}

/// Log-density of n i.i.d. Gaussian observations:
///
/// ```text
///   ln f(x^n; μ, Σ) = −(mn/2)·ln(2π) − (n/2)·ln|Σ|
///                     − (1/2)·Σᵢ (xᵢ−μ)ᵀ Σ⁻¹ (xᵢ−μ)
/// ```
///
/// computed via one Cholesky factorization (log-determinant plus a
/// triangular solve per row).
///
/// # Errors
///
/// Dimension mismatch between x and θ; non-positive-definite Σ; n = 0.
pub fn log_density_f(x: &ObservationMatrix, theta: &GaussParams) -> Result<f64> {
    if x.m() != theta.m() {
        return Err(LnmlError::DimensionMismatch(format!(
            "observations have dimension {}, parameters have {}",
            x.m(),
            theta.m()
        )));
    }
    let n = x.n();
    if n == 0 {
        return Err(LnmlError::Domain("log_density_f requires n ≥ 1".to_string()));
    }
    let m = x.m();
    let chol = cholesky(theta.sigma(), "sigma")?;
    let half_log_det = 0.5 * log_det(&chol);
    let l = chol.l_dirty();
    let mut quad = 0.0;
    for r in x.iter_rows() {
        let d = r - theta.mu();
        let z = l
            .solve_lower_triangular(&d)
            .ok_or_else(|| LnmlError::NotPositiveDefinite("sigma: singular factor".to_string()))?;
        quad += z.norm_squared();
    }
    Ok(-(m as f64) * (n as f64) / 2.0 * LOG_TWO_PI - (n as f64) * half_log_det - 0.5 * quad)
}

/// Log of the luckiness tilt:
///
/// ```text
///   ln π(μ, Σ) = −(mν/2)·ln(2π) − (ν/2)·ln|Σ|
///                − (ν/2)·tr[Σ⁻¹(Σ₀ + ρ²(μ−μ₀)(μ−μ₀)ᵀ)]
/// ```
///
/// π is a weight, not a probability — it is deliberately unnormalized. Its
/// absolute scale still matters: the capacity is the integral of max f·π, so
/// the (2π)^{−mν/2} prefactor is part of the definition, not a convention.
///
/// # Errors
///
/// Dimension mismatch; non-positive-definite Σ.
pub fn log_luckiness_pi(theta: &GaussParams, lp: &LuckinessParams) -> Result<f64> {
    if theta.m() != lp.m() {
        return Err(LnmlError::DimensionMismatch(format!(
            "parameters have dimension {}, luckiness has {}",
            theta.m(),
            lp.m()
        )));
    }
    let m = lp.m() as f64;
    let nu = lp.nu();
    let chol = cholesky(theta.sigma(), "sigma")?;
    let log_det_sigma = log_det(&chol);
    // tr[Σ⁻¹ A] with A = Σ₀ + ρ² d dᵀ, via a single positive-definite solve.
    let d = theta.mu() - lp.mu0();
    let mut a = lp.sigma0().clone();
    a.ger(lp.rho2(), &d, &d, 1.0);
    let x = chol.solve(&a);
    let trace = x.diagonal().sum();
    Ok(-m * nu / 2.0 * LOG_TWO_PI - nu / 2.0 * log_det_sigma - nu / 2.0 * trace)
}

/// The default hyperparameter heuristic: given a scale floor σ² and a radius
/// R for the plausible mean region, returns
///
/// ```text
///   ν = m,   μ₀ = 0,   Σ₀ = σ²·I_m,   ρ² = σ²/(m·R²)
/// ```
///
/// Small ν keeps the tilt weak; this choice makes the confidence ellipsoid
/// {μ : (μ−μ₀)ᵀΣ₀⁻¹(μ−μ₀) ≤ 1/(νρ²)} exactly the ball ‖μ‖ ≤ R.
///
/// # Errors
///
/// Non-positive σ² or R.
pub fn default_luckiness(m: usize, sigma2_floor: f64, radius_r: f64) -> Result<LuckinessParams> {
    if m == 0 {
        return Err(LnmlError::Domain("dimension must be ≥ 1".to_string()));
    }
    if !sigma2_floor.is_finite() || sigma2_floor <= 0.0 {
        return Err(LnmlError::Domain(format!(
            "sigma2_floor must be positive, got {sigma2_floor}"
        )));
    }
    if !radius_r.is_finite() || radius_r <= 0.0 {
        return Err(LnmlError::Domain(format!("radius_r must be positive, got {radius_r}")));
    }
    let nu = m as f64;
    let rho2 = sigma2_floor / (m as f64 * radius_r * radius_r);
    LuckinessParams::new(
        nu,
        DVector::zeros(m),
        DMatrix::identity(m, m) * sigma2_floor,
        rho2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    fn mat1(x: f64) -> DMatrix<f64> {
        DMatrix::from_vec(1, 1, vec![x])
    }

    fn lp_simple_1d() -> LuckinessParams {
        LuckinessParams::new(1.0, vec1(0.0), mat1(1.0), 1.0).unwrap()
    }

    #[test]
    fn density_standard_normal_at_mode() {
        let x = ObservationMatrix::from_rows(&[vec1(0.0)]).unwrap();
        let theta = GaussParams::new(vec1(0.0), mat1(1.0)).unwrap();
        assert_relative_eq!(
            log_density_f(&x, &theta).unwrap(),
            -0.5 * LOG_TWO_PI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn density_bivariate_standard_at_mode() {
        let x = ObservationMatrix::from_rows(&[DVector::zeros(2)]).unwrap();
        let theta = GaussParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(log_density_f(&x, &theta).unwrap(), -LOG_TWO_PI, max_relative = 1e-15);
    }

    #[test]
    fn density_two_scalar_points() {
        // x = [1, −1], μ = 0, Σ = 2: −ln(2π) − ln 2 − 1/2.
        let x = ObservationMatrix::from_rows(&[vec1(1.0), vec1(-1.0)]).unwrap();
        let theta = GaussParams::new(vec1(0.0), mat1(2.0)).unwrap();
        assert_relative_eq!(
            log_density_f(&x, &theta).unwrap(),
            -LOG_TWO_PI - 2.0f64.ln() - 0.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn density_matches_direct_formula_m2() {
        // Frozen 50-digit reference for a non-trivial (μ, Σ) and 4 points.
        let x = ObservationMatrix::from_rows(&[
            DVector::from_vec(vec![1.0, -0.5]),
            DVector::from_vec(vec![0.2, 0.8]),
            DVector::from_vec(vec![-1.1, 0.4]),
            DVector::from_vec(vec![0.6, 1.5]),
        ])
        .unwrap();
        let theta = GaussParams::new(
            DVector::from_vec(vec![0.4, -0.2]),
            DMatrix::from_row_slice(2, 2, &[1.5, -0.4, -0.4, 0.9]),
        )
        .unwrap();
        assert_relative_eq!(
            log_density_f(&x, &theta).unwrap(),
            -11.135_969_501_732_997,
            max_relative = 1e-13
        );
    }

    #[test]
    fn density_rejects_bad_inputs() {
        let x = ObservationMatrix::from_rows(&[vec1(0.0)]).unwrap();
        let theta2 = GaussParams::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(
            log_density_f(&x, &theta2),
            Err(LnmlError::DimensionMismatch(_))
        ));
        assert!(GaussParams::new(vec1(0.0), mat1(0.0)).is_err());
        assert!(GaussParams::new(vec1(0.0), mat1(-1.0)).is_err());
    }

    #[test]
    fn luckiness_at_prior_center() {
        // m=1, μ=μ₀=0, Σ=Σ₀=1, ν=1, ρ²=1 → −(1/2)ln(2π) − 1/2.
        let lp = lp_simple_1d();
        let theta = GaussParams::new(vec1(0.0), mat1(1.0)).unwrap();
        assert_relative_eq!(
            log_luckiness_pi(&theta, &lp).unwrap(),
            -0.5 * LOG_TWO_PI - 0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn luckiness_trace_example_m2() {
        // μ−μ₀=(1,0), Σ=I₂, Σ₀=I₂, ν=2, ρ²=0.5 → −2ln(2π) − (tr I₂ + 0.5).
        let lp = LuckinessParams::new(2.0, DVector::zeros(2), DMatrix::identity(2, 2), 0.5)
            .unwrap();
        let theta =
            GaussParams::new(DVector::from_vec(vec![1.0, 0.0]), DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(
            log_luckiness_pi(&theta, &lp).unwrap(),
            -2.0 * LOG_TWO_PI - 2.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn luckiness_matches_simple_form() {
        // With μ₀ = 0, Σ₀ = σ²I the general form must equal the simple
        // expression −(mν/2)ln(2π) − (ν/2)ln|Σ| − (ν/2)[σ²tr(Σ⁻¹) + ρ²μᵀΣ⁻¹μ].
        let (nu, s2, rho2) = (2.4, 1.7, 0.6);
        let lp = LuckinessParams::new(
            nu,
            DVector::zeros(2),
            DMatrix::identity(2, 2) * s2,
            rho2,
        )
        .unwrap();
        let mu = DVector::from_vec(vec![0.3, -1.2]);
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.1]);
        let theta = GaussParams::new(mu.clone(), sigma.clone()).unwrap();

        let inv = sigma.clone().try_inverse().unwrap();
        let expected = -2.0 * nu / 2.0 * LOG_TWO_PI
            - nu / 2.0 * sigma.determinant().ln()
            - nu / 2.0 * (s2 * inv.trace() + rho2 * (mu.transpose() * &inv * &mu)[(0, 0)]);
        assert_relative_eq!(
            log_luckiness_pi(&theta, &lp).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn luckiness_frozen_reference_m2() {
        let lp = LuckinessParams::new(
            3.0,
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
            0.5,
        )
        .unwrap();
        let theta = GaussParams::new(
            DVector::from_vec(vec![0.4, -0.2]),
            DMatrix::from_row_slice(2, 2, &[1.5, -0.4, -0.4, 0.9]),
        )
        .unwrap();
        assert_relative_eq!(
            log_luckiness_pi(&theta, &lp).unwrap(),
            -11.081_283_848_988_824,
            max_relative = 1e-13
        );
    }

    #[test]
    fn default_luckiness_formulas() {
        let lp = default_luckiness(1, 1.0, 1.0).unwrap();
        assert_eq!(lp.nu(), 1.0);
        assert_eq!(lp.rho2(), 1.0);
        assert_eq!(lp.sigma0()[(0, 0)], 1.0);

        let lp = default_luckiness(2, 4.0, 10.0).unwrap();
        assert_eq!(lp.nu(), 2.0);
        assert_relative_eq!(lp.rho2(), 0.02, max_relative = 1e-15);
        assert_eq!(lp.sigma0()[(0, 0)], 4.0);
        assert_eq!(lp.sigma0()[(0, 1)], 0.0);

        // Ball identity: (1/(νρ²))·Σ₀ has radius² R² on the diagonal, i.e.
        // the ellipsoid {μᵀΣ₀⁻¹μ ≤ 1/(νρ²)} is exactly {‖μ‖ ≤ R}.
        let (m, s2, r) = (3usize, 2.5, 7.0);
        let lp = default_luckiness(m, s2, r).unwrap();
        let radius2 = s2 / (lp.nu() * lp.rho2());
        assert_relative_eq!(radius2, r * r, max_relative = 1e-12);

        assert!(default_luckiness(1, 0.0, 1.0).is_err());
        assert!(default_luckiness(1, 1.0, -2.0).is_err());
    }

    #[test]
    fn suffstats_accumulate_and_center() {
        let mut st = SuffStats::new(vec1(0.0)).unwrap();
        st.update(&vec1(2.0)).unwrap();
        assert_eq!(st.n(), 1);
        assert_eq!(st.t()[0], 2.0);
        assert_eq!(st.s()[(0, 0)], 4.0);
        st.update(&vec1(0.0)).unwrap();
        assert_eq!(st.n(), 2);
        assert_eq!(st.t()[0], 2.0);
        assert_eq!(st.s()[(0, 0)], 4.0);

        let mut centered = SuffStats::new(vec1(1.0)).unwrap();
        centered.update(&vec1(3.0)).unwrap();
        assert_eq!(centered.n(), 1);
        assert_eq!(centered.t()[0], 2.0);
        assert_eq!(centered.s()[(0, 0)], 4.0);
    }

    #[test]
    fn suffstats_difference_is_suffix_stats() {
        let rows: Vec<DVector<f64>> =
            (0..6).map(|i| DVector::from_vec(vec![i as f64, -(i as f64) * 0.5])).collect();
        let x = ObservationMatrix::from_rows(&rows).unwrap();
        let full = SuffStats::from_observations(&x, DVector::zeros(2)).unwrap();
        let prefix =
            SuffStats::from_observations(&x.slice_rows(0, 2).unwrap(), DVector::zeros(2)).unwrap();
        let suffix =
            SuffStats::from_observations(&x.slice_rows(2, 6).unwrap(), DVector::zeros(2)).unwrap();
        let diff = full.difference(&prefix).unwrap();
        assert_eq!(diff.n(), suffix.n());
        assert_relative_eq!(
            (diff.t() - suffix.t()).norm(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            (diff.s() - suffix.s()).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn suffstats_rejects_mismatches() {
        let mut st = SuffStats::new(vec1(0.0)).unwrap();
        assert!(st.update(&DVector::zeros(2)).is_err());
        assert!(st.update(&vec1(f64::NAN)).is_err());
        let other = SuffStats::new(vec1(1.0)).unwrap();
        assert!(st.difference(&other).is_err());
    }

    #[test]
    fn luckiness_params_validation() {
        // ν must exceed m−1 strictly.
        assert!(LuckinessParams::new(1.0, DVector::zeros(2), DMatrix::identity(2, 2), 1.0)
            .is_err());
        assert!(LuckinessParams::new(1.0001, DVector::zeros(2), DMatrix::identity(2, 2), 1.0)
            .is_ok());
        // Σ₀ must be PD.
        assert!(LuckinessParams::new(1.0, vec1(0.0), mat1(0.0), 1.0).is_err());
        // ρ² must be positive.
        assert!(LuckinessParams::new(1.0, vec1(0.0), mat1(1.0), 0.0).is_err());
        // Asymmetric Σ₀ is rejected.
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(LuckinessParams::new(2.0, DVector::zeros(2), asym, 1.0).is_err());
    }

    #[test]
    fn observation_matrix_shape_checks() {
        assert!(ObservationMatrix::from_rows(&[]).is_err());
        assert!(
            ObservationMatrix::from_rows(&[vec1(0.0), DVector::zeros(2)]).is_err()
        );
        let e = ObservationMatrix::empty(3).unwrap();
        assert_eq!(e.n(), 0);
        assert_eq!(e.m(), 3);
        let x = ObservationMatrix::from_rows(&[vec1(1.0), vec1(2.0), vec1(3.0)]).unwrap();
        let s = x.slice_rows(1, 3).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.row_vec(0)[0], 2.0);
        assert!(x.slice_rows(2, 5).is_err());
    }

    #[test]
    fn density_permutation_invariance() {
        let rows: Vec<DVector<f64>> = (0..7)
            .map(|i| DVector::from_vec(vec![(i as f64).sin() * 2.0, (i as f64).cos() - 0.3]))
            .collect();
        let theta = GaussParams::new(
            DVector::from_vec(vec![0.1, -0.4]),
            DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 0.8]),
        )
        .unwrap();
        let base =
            log_density_f(&ObservationMatrix::from_rows(&rows).unwrap(), &theta).unwrap();
        let mut perm = rows.clone();
        perm.reverse();
        perm.swap(1, 3);
        let permuted =
            log_density_f(&ObservationMatrix::from_rows(&perm).unwrap(), &theta).unwrap();
        // The density depends on the rows only through sums; row order can
        // only move the floating-point summation order around.
        assert_relative_eq!(base, permuted, max_relative = 1e-12);
    }
}
