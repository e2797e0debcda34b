//! MDL change-point detection with LNML segment costs.
//!
//! A segmentation of x^n into segments [0,k₁), [k₁,k₂), …, [kₛ,n) is scored
//! by a two-part code:
//!
//! ```text
//!   total = Σ_segments −ln p̄(segment)          (LNML data cost)
//!         + s·ln(n−1)                          (uniform code per split position)
//!         + ln(max_splits+1)                   (uniform code for the split count)
//! ```
//!
//! The luckiness is shared across segments: re-fitting it per segment would
//! make the total data-dependent twice over and void its interpretation as
//! a code length. Minimizing the total is exact dynamic programming over
//! split positions; ties break toward fewer splits, then lexicographically
//! smallest boundaries, so the detector is fully deterministic.
//!
//! Segment costs come from cached prefix sufficient statistics — O(1) per
//! query after an O(n·m²) pass — since the DP asks for O(n²) of them.

use crate::code::log_lnml_closed;
use crate::error::{LnmlError, Result};
use crate::model::{LuckinessParams, ObservationMatrix, SuffStats};

/// A segmentation: split indices (strictly increasing, in (0, n)) and the
/// complete two-part code length that selected it.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Interior split positions k (each segment is [kᵢ, kᵢ₊₁)).
    pub boundaries: Vec<usize>,
    /// Per-segment LNML code lengths, in segment order.
    pub segment_nats: Vec<f64>,
    /// Σ segment costs + split-position codes + split-count code.
    pub total_nats: f64,
    /// The competing no-split total (whole-range cost + split-count code),
    /// for reporting alongside the winner.
    pub baseline_nats: f64,
}

/// Cached prefix sufficient statistics for O(1) segment-cost queries.
pub struct SegmentCosts {
    prefix: Vec<SuffStats>,
    lp: LuckinessParams,
}

impl SegmentCosts {
    /// Accumulate prefix statistics for x under the given luckiness.
    pub fn new(x: &ObservationMatrix, lp: &LuckinessParams) -> Result<Self> {
        if x.m() != lp.m() {
            return Err(LnmlError::DimensionMismatch(format!(
                "observations have dimension {}, luckiness has {}",
                x.m(),
                lp.m()
            )));
        }
        let mut prefix = Vec::with_capacity(x.n() + 1);
        let mut running = SuffStats::for_luckiness(lp);
        prefix.push(running.clone());
        for r in x.iter_rows() {
            running.update(&r)?;
            prefix.push(running.clone());
        }
        Ok(Self { prefix, lp: lp.clone() })
    }

    /// Number of observations n.
    pub fn n(&self) -> usize {
        self.prefix.len() - 1
    }

    /// LNML code length (nats) of rows [a, b), from prefix differences.
    pub fn cost(&self, a: usize, b: usize) -> Result<f64> {
        if a >= b || b > self.n() {
            return Err(LnmlError::Domain(format!(
                "segment [{a}, {b}) is empty or out of bounds for n = {}",
                self.n()
            )));
        }
        let seg = self.prefix[b].difference(&self.prefix[a])?;
        Ok(-log_lnml_closed(&seg, &self.lp)?)
    }
}

/// LNML code length (nats) of the rows [a, b) of x — direct recomputation
/// from the slice. [`SegmentCosts`] answers the same query from cached
/// prefix statistics; the two agree to ~1e-12 and the tests pin it.
pub fn segment_cost(
    x: &ObservationMatrix,
    a: usize,
    b: usize,
    lp: &LuckinessParams,
) -> Result<f64> {
    if a >= b || b > x.n() {
        return Err(LnmlError::Domain(format!(
            "segment [{a}, {b}) is empty or out of bounds for n = {}",
            x.n()
        )));
    }
    let slice = x.slice_rows(a, b)?;
    let stats = SuffStats::from_observations(&slice, lp.mu0().clone())?;
    Ok(-log_lnml_closed(&stats, lp)?)
}

fn validate_min_seg(n: usize, min_seg: usize) -> Result<()> {
    if min_seg == 0 {
        return Err(LnmlError::InvalidConfig(
            "min_seg must be ≥ 1 (segments cannot be empty)".to_string(),
        ));
    }
    if n < min_seg {
        return Err(LnmlError::Domain(format!(
            "n = {n} is smaller than one minimum-length segment (min_seg = {min_seg})"
        )));
    }
    Ok(())
}

/// Scan all admissible single splits. Returns the split index minimizing
/// L(k) = ln(n−1) + cost([0,k)) + cost([k,n)) — smallest k on exact ties —
/// or `None` when even the best split fails to beat the unsplit cost.
///
/// # Errors
///
/// n < 2·min_seg (no admissible split exists).
pub fn detect_single_change(
    x: &ObservationMatrix,
    lp: &LuckinessParams,
    min_seg: usize,
) -> Result<Option<usize>> {
    let n = x.n();
    validate_min_seg(n, min_seg)?;
    if n < 2 * min_seg {
        return Err(LnmlError::Domain(format!(
            "n = {n} admits no split with min_seg = {min_seg} (need n ≥ {})",
            2 * min_seg
        )));
    }
    let costs = SegmentCosts::new(x, lp)?;
    let split_code = ((n - 1) as f64).ln();
    let mut best: Option<(usize, f64)> = None;
    for k in min_seg..=(n - min_seg) {
        let l = split_code + costs.cost(0, k)? + costs.cost(k, n)?;
        // Strict improvement keeps the smallest index on exact ties.
        if best.is_none_or(|(_, lb)| l < lb) {
            best = Some((k, l));
        }
    }
    let (k, l) = best.expect("admissible range is non-empty");
    Ok(if l < costs.cost(0, n)? { Some(k) } else { None })
}

/// One dynamic-programming cell: the best (cost, boundary vector) for a
/// fixed split count and prefix length.
#[derive(Clone)]
struct Cell {
    cost: f64,
    bounds: Vec<usize>,
}

/// `true` when (cost_a, bounds_a) beats (cost_b, bounds_b) under the
/// deterministic order: smaller cost, then fewer splits, then
/// lexicographically smaller boundaries.
fn beats(cost_a: f64, bounds_a: &[usize], cost_b: f64, bounds_b: &[usize]) -> bool {
    if cost_a != cost_b {
        return cost_a < cost_b;
    }
    if bounds_a.len() != bounds_b.len() {
        return bounds_a.len() < bounds_b.len();
    }
    bounds_a < bounds_b
}

/// Exact minimization of the two-part code over all segmentations with at
/// most `max_splits` interior splits and segments of length ≥ `min_seg`.
///
/// Deterministic: identical input yields the identical segmentation
/// (ties break toward fewer splits, then lexicographically).
///
/// # Errors
///
/// Infeasible constraints (n < min_seg, or min_seg = 0).
pub fn detect_multi_change(
    x: &ObservationMatrix,
    lp: &LuckinessParams,
    min_seg: usize,
    max_splits: usize,
) -> Result<Segmentation> {
    let n = x.n();
    validate_min_seg(n, min_seg)?;
    let costs = SegmentCosts::new(x, lp)?;
    let split_code = if n > 1 { ((n - 1) as f64).ln() } else { 0.0 };
    let count_code = ((max_splits + 1) as f64).ln();

    // table[s][j]: best cost of segmenting [0, j) into s+1 segments
    // (s interior splits), with its boundary vector. Costs are the plain
    // segment sums, accumulated left to right; position/count codes are
    // added when candidates are compared across s.
    let feasible_splits = max_splits.min(n / min_seg - 1);
    let mut table: Vec<Vec<Option<Cell>>> = vec![vec![None; n + 1]; feasible_splits + 1];
    // Indexed loops state the recurrence directly; iterator forms would
    // bury the (s, j, k) structure.
    #[allow(clippy::needless_range_loop)]
    for j in min_seg..=n {
        table[0][j] = Some(Cell { cost: costs.cost(0, j)?, bounds: Vec::new() });
    }
    for s in 1..=feasible_splits {
        for j in ((s + 1) * min_seg)..=n {
            let mut best: Option<Cell> = None;
            // Final segment [k, j): k ranges over feasible previous prefixes.
            #[allow(clippy::needless_range_loop)]
            for k in (s * min_seg)..=(j - min_seg) {
                let Some(prev) = &table[s - 1][k] else { continue };
                let cand_cost = prev.cost + costs.cost(k, j)?;
                let replace = match &best {
                    None => true,
                    Some(b) => {
                        // Within fixed s the lengths agree; compare cost
                        // then the full boundary vector (prefix ++ [k]).
                        cand_cost < b.cost
                            || (cand_cost == b.cost && {
                                let mut cand_bounds = prev.bounds.clone();
                                cand_bounds.push(k);
                                cand_bounds < b.bounds
                            })
                    }
                };
                if replace {
                    let mut bounds = prev.bounds.clone();
                    bounds.push(k);
                    best = Some(Cell { cost: cand_cost, bounds });
                }
            }
            table[s][j] = best;
        }
    }

    // Compare the per-count winners on the full two-part code.
    let mut winner: Option<(f64, Cell)> = None;
    for (s, row) in table.iter().enumerate() {
        let Some(cell) = &row[n] else { continue };
        let total = cell.cost + s as f64 * split_code + count_code;
        let replace = match &winner {
            None => true,
            Some((wt, wc)) => beats(total, &cell.bounds, *wt, &wc.bounds),
        };
        if replace {
            winner = Some((total, cell.clone()));
        }
    }
    let (total_nats, cell) =
        winner.ok_or_else(|| LnmlError::Domain("no feasible segmentation".to_string()))?;

    let mut segment_nats = Vec::with_capacity(cell.bounds.len() + 1);
    let mut start = 0usize;
    for &b in cell.bounds.iter().chain(std::iter::once(&n)) {
        segment_nats.push(costs.cost(start, b)?);
        start = b;
    }
    let baseline_nats = costs.cost(0, n)? + count_code;
    Ok(Segmentation { boundaries: cell.bounds, segment_nats, total_nats, baseline_nats })
}

/// Default minimum segment length for dimension m: m+1 keeps segments
/// informative, though the LNML cost itself is proper from n = 1 (the
/// luckiness regularizes). Purely a quality heuristic.
pub fn default_min_seg(m: usize) -> usize {
    m + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_vec(vec![x])
    }

    fn obs_1d(xs: &[f64]) -> ObservationMatrix {
        let rows: Vec<DVector<f64>> = xs.iter().map(|&v| vec1(v)).collect();
        ObservationMatrix::from_rows(&rows).unwrap()
    }

    fn lp_simple_1d() -> LuckinessParams {
        LuckinessParams::new(1.0, vec1(0.0), DMatrix::from_vec(1, 1, vec![1.0]), 1.0).unwrap()
    }

    #[test]
    fn whole_range_cost_is_the_batch_code_length() {
        let lp = lp_simple_1d();
        let x = obs_1d(&[0.5, -1.0, 2.0, 0.3]);
        let stats = SuffStats::from_observations(&x, lp.mu0().clone()).unwrap();
        let want = -log_lnml_closed(&stats, &lp).unwrap();
        assert_relative_eq!(segment_cost(&x, 0, 4, &lp).unwrap(), want, epsilon = 1e-12);
        let costs = SegmentCosts::new(&x, &lp).unwrap();
        assert_relative_eq!(costs.cost(0, 4).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn prefix_cache_matches_direct_recomputation() {
        let lp = LuckinessParams::new(
            2.5,
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]),
            0.6,
        )
        .unwrap();
        let rows: Vec<DVector<f64>> = (0..20)
            .map(|i| {
                let t = i as f64;
                DVector::from_vec(vec![(t * 1.3).sin() * 2.0 + t * 0.1, (t * 0.7).cos()])
            })
            .collect();
        let x = ObservationMatrix::from_rows(&rows).unwrap();
        let costs = SegmentCosts::new(&x, &lp).unwrap();
        for a in 0..20 {
            for b in (a + 1)..=20 {
                assert_relative_eq!(
                    costs.cost(a, b).unwrap(),
                    segment_cost(&x, a, b, &lp).unwrap(),
                    epsilon = 1e-9 * segment_cost(&x, a, b, &lp).unwrap().abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn single_point_segment_cost_fixture() {
        let lp = lp_simple_1d();
        let x = obs_1d(&[0.0]);
        assert_relative_eq!(
            segment_cost(&x, 0, 1, &lp).unwrap(),
            1.491_303_476_129_372_8,
            max_relative = 1e-14
        );
    }

    #[test]
    fn obvious_mean_shift_is_found() {
        // 30 points near −5, then 30 near +5: the split must land at 30.
        let lp = lp_simple_1d();
        let xs: Vec<f64> = (0..60)
            .map(|i| {
                let noise = ((i * 37 + 11) % 17) as f64 / 17.0 - 0.5;
                if i < 30 {
                    -5.0 + noise
                } else {
                    5.0 + noise
                }
            })
            .collect();
        let x = obs_1d(&xs);
        let split = detect_single_change(&x, &lp, 2).unwrap();
        assert_eq!(split, Some(30));
        let seg = detect_multi_change(&x, &lp, 2, 1).unwrap();
        assert_eq!(seg.boundaries, vec![30]);
        assert!(seg.total_nats < seg.baseline_nats);
        assert_eq!(seg.segment_nats.len(), 2);
    }

    #[test]
    fn homogeneous_data_yields_no_change() {
        let lp = lp_simple_1d();
        // Mild deterministic wiggle around 0, no shift.
        let xs: Vec<f64> = (0..50).map(|i| ((i * 29 + 7) % 13) as f64 / 13.0 - 0.5).collect();
        let x = obs_1d(&xs);
        assert_eq!(detect_single_change(&x, &lp, 2).unwrap(), None);
        let seg = detect_multi_change(&x, &lp, 2, 3).unwrap();
        assert!(seg.boundaries.is_empty());
        assert_relative_eq!(seg.total_nats, seg.baseline_nats, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_search_space_single_admissible_split() {
        let lp = lp_simple_1d();
        // n = 2·min_seg: only k = min_seg is admissible.
        let x = obs_1d(&[-4.0, -4.1, 4.0, 4.2]);
        let split = detect_single_change(&x, &lp, 2).unwrap();
        assert_eq!(split, Some(2));
        // Homogeneous version: the lone candidate loses to no-split.
        let y = obs_1d(&[0.1, -0.1, 0.05, -0.02]);
        assert_eq!(detect_single_change(&y, &lp, 2).unwrap(), None);
    }

    #[test]
    fn zero_max_splits_returns_whole_range() {
        let lp = lp_simple_1d();
        let x = obs_1d(&[-4.0, -4.1, 4.0, 4.2]);
        let seg = detect_multi_change(&x, &lp, 1, 0).unwrap();
        assert!(seg.boundaries.is_empty());
        assert_eq!(seg.segment_nats.len(), 1);
        assert_relative_eq!(
            seg.total_nats,
            segment_cost(&x, 0, 4, &lp).unwrap(),
            epsilon = 1e-12
        );
        assert_relative_eq!(seg.total_nats, seg.baseline_nats, epsilon = 1e-15);
    }

    #[test]
    fn max_splits_one_agrees_with_single_change() {
        let lp = lp_simple_1d();
        for xs in [
            vec![-4.0, -4.1, -3.9, 4.0, 4.2, 3.8],
            vec![0.1, -0.2, 0.15, -0.05, 0.3, -0.3],
            vec![1.0, 1.1, 0.9, 1.05, -2.0, -2.1],
        ] {
            let x = obs_1d(&xs);
            let single = detect_single_change(&x, &lp, 2).unwrap();
            let multi = detect_multi_change(&x, &lp, 2, 1).unwrap();
            match single {
                Some(k) => assert_eq!(multi.boundaries, vec![k]),
                None => assert!(multi.boundaries.is_empty()),
            }
        }
    }

    #[test]
    fn two_regimes_recovered_with_two_splits_allowed() {
        let lp = lp_simple_1d();
        let mut xs = Vec::new();
        for i in 0..20 {
            xs.push(((i * 31 + 5) % 11) as f64 / 11.0 - 0.5);
        }
        for i in 0..20 {
            xs.push(8.0 + ((i * 17 + 3) % 7) as f64 / 7.0);
        }
        let x = obs_1d(&xs);
        let seg = detect_multi_change(&x, &lp, 3, 4).unwrap();
        assert_eq!(seg.boundaries, vec![20]);
    }

    #[test]
    fn detector_is_deterministic() {
        let lp = lp_simple_1d();
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.77).sin() * 3.0).collect();
        let x = obs_1d(&xs);
        let a = detect_multi_change(&x, &lp, 2, 3).unwrap();
        let b = detect_multi_change(&x, &lp, 2, 3).unwrap();
        assert_eq!(a.boundaries, b.boundaries);
        assert_eq!(a.total_nats, b.total_nats);
    }

    #[test]
    fn infeasible_constraints_are_rejected() {
        let lp = lp_simple_1d();
        let x = obs_1d(&[1.0, 2.0, 3.0]);
        assert!(detect_single_change(&x, &lp, 2).is_err()); // n < 2·min_seg
        assert!(detect_single_change(&x, &lp, 0).is_err());
        assert!(detect_multi_change(&x, &lp, 0, 1).is_err());
        assert!(detect_multi_change(&x, &lp, 4, 1).is_err()); // n < min_seg
        assert!(segment_cost(&x, 2, 2, &lp).is_err());
        assert!(segment_cost(&x, 0, 9, &lp).is_err());
        let costs = SegmentCosts::new(&x, &lp).unwrap();
        assert!(costs.cost(1, 1).is_err());
    }

    #[test]
    fn unused_split_allowance_never_lowers_the_data_cost() {
        // Raising max_splits adds ln(max_splits+1) to every candidate
        // total; the chosen boundaries stay optimal, and the reported
        // total grows by exactly the count-code difference when the data
        // carry no extra structure worth a split.
        let lp = lp_simple_1d();
        let xs: Vec<f64> = (0..30).map(|i| ((i * 23 + 1) % 19) as f64 / 19.0).collect();
        let x = obs_1d(&xs);
        let one = detect_multi_change(&x, &lp, 2, 1).unwrap();
        let five = detect_multi_change(&x, &lp, 2, 5).unwrap();
        assert_eq!(one.boundaries, five.boundaries);
        assert_relative_eq!(
            five.total_nats - one.total_nats,
            6.0f64.ln() - 2.0f64.ln(),
            epsilon = 1e-12
        );
    }
}
