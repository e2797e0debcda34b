//! Property-based invariants: structural identities that must hold for
//! every valid input, explored by randomized search rather than a fixed
//! grid. These complement the acceptance criteria, which pin oracle
//! comparisons and specific magnitudes on deterministic seeds.

mod common;

use lnml_core::{
    detect_multi_change, detect_single_change, log_capacity_general, log_lnml_closed,
    log_lnml_ratio, log_mvt_pdf, map_batch, map_stream_update, segment_cost, tilted_regret,
    CoderState, LuckinessParams, MapEstimate, ObservationMatrix, PredictiveT, SegmentCosts,
    SuffStats,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

/// Valid luckiness parameters for dimension m: ν clear of the Γ_m pole,
/// O(1) prior scales with spectrum bounded below.
fn luckiness(m: usize) -> impl Strategy<Value = LuckinessParams> {
    (
        (m as f64 - 1.0 + 0.4)..(m as f64 + 3.0),
        prop::collection::vec(-2.0f64..2.0, m),
        prop::collection::vec(-1.0f64..1.0, m * m),
        0.3f64..3.0,
    )
        .prop_map(move |(nu, mu0, entries, rho2)| {
            let a = DMatrix::from_row_slice(m, m, &entries);
            let sigma0 = &a * a.transpose() + DMatrix::identity(m, m) * 0.3;
            LuckinessParams::new(nu, DVector::from_vec(mu0), sigma0, rho2)
                .expect("parameters are valid by construction")
        })
}

/// A dimension, matching luckiness, and 1..=max_n observations with
/// entries in [−5, 5).
fn problem(max_n: usize) -> impl Strategy<Value = (LuckinessParams, ObservationMatrix)> {
    (1usize..=3).prop_flat_map(move |m| {
        (
            luckiness(m),
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, m), 1..=max_n),
        )
            .prop_map(|(lp, raw)| {
                let rows: Vec<DVector<f64>> = raw.into_iter().map(DVector::from_vec).collect();
                (lp, ObservationMatrix::from_rows(&rows).expect("rows are valid"))
            })
    })
}

proptest! {
    /// Sufficient statistics are symmetric functions of the rows.
    #[test]
    fn suffstats_ignore_observation_order((lp, x) in problem(10), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let order = common::random_permutation(x.n(), &mut rng);
        let permuted: Vec<DVector<f64>> = order.iter().map(|&i| x.row_vec(i)).collect();
        let y = ObservationMatrix::from_rows(&permuted).expect("rows are valid");
        let a = SuffStats::from_observations(&x, lp.mu0().clone()).expect("stats build");
        let b = SuffStats::from_observations(&y, lp.mu0().clone()).expect("stats build");
        prop_assert!((a.t() - b.t()).norm() <= 1e-12 * (1.0 + a.t().norm()));
        prop_assert!((a.s() - b.s()).norm() <= 1e-12 * (1.0 + a.s().norm()));
    }

    /// The centered scatter S − ttᵀ/n is positive semidefinite for any
    /// centering (the Cauchy–Schwarz direction of the sufficient
    /// statistics).
    #[test]
    fn centered_scatter_is_positive_semidefinite((lp, x) in problem(10)) {
        let stats = SuffStats::from_observations(&x, lp.mu0().clone()).expect("stats build");
        let n = stats.n() as f64;
        let mut centered = stats.s().clone();
        centered.ger(-1.0 / n, stats.t(), stats.t(), 1.0);
        let floor = -1e-9 * (1.0 + stats.s().norm());
        let eigen = SymmetricEigen::new(centered);
        prop_assert!(eigen.eigenvalues.iter().all(|&l| l >= floor));
    }

    /// The closed-form log-density and the ratio form (numerator at the
    /// MAP minus log-capacity) are the same function.
    #[test]
    fn closed_and_ratio_forms_agree((lp, x) in problem(12)) {
        let stats = SuffStats::from_observations(&x, lp.mu0().clone()).expect("stats build");
        let closed = log_lnml_closed(&stats, &lp).expect("closed form evaluates");
        let ratio = log_lnml_ratio(&x, &lp).expect("ratio form evaluates");
        prop_assert!((closed - ratio).abs() <= 1e-9);
    }

    /// Against its own code, the tilted regret is the capacity — for every
    /// input, not just on average.
    #[test]
    fn tilted_regret_is_capacity_everywhere((lp, x) in problem(12)) {
        let stats = SuffStats::from_observations(&x, lp.mu0().clone()).expect("stats build");
        let q = log_lnml_closed(&stats, &lp).expect("closed form evaluates");
        let regret = tilted_regret(q, &x, &lp).expect("regret evaluates");
        let capacity = log_capacity_general(lp.m(), x.n(), &lp).expect("capacity evaluates");
        prop_assert!((regret - capacity).abs() <= 1e-9);
    }

    /// The rank-one streaming recursion tracks the batch MAP exactly.
    #[test]
    fn streaming_map_tracks_batch((lp, x) in problem(12)) {
        let mut streamed = MapEstimate::initial(&lp);
        let mut running = SuffStats::for_luckiness(&lp);
        for r in x.iter_rows() {
            streamed = map_stream_update(&streamed, &r, &lp).expect("update succeeds");
            running.update(&r).expect("stats update succeeds");
            let batch = map_batch(&running, &lp).expect("batch MAP evaluates");
            let mu_err = (streamed.mu_bar() - batch.mu_bar()).norm()
                / batch.mu_bar().norm().max(1.0);
            let sigma_err = (streamed.sigma_bar() - batch.sigma_bar()).norm()
                / batch.sigma_bar().norm();
            prop_assert!(mu_err <= 1e-9 && sigma_err <= 1e-9);
        }
    }

    /// The per-point predictive nats telescope into the batch code length.
    #[test]
    fn coder_total_telescopes_to_batch((lp, x) in problem(12)) {
        let mut coder = CoderState::new(lp.clone());
        for r in x.iter_rows() {
            coder.step(&r).expect("coder step succeeds");
        }
        let stats = SuffStats::from_observations(&x, lp.mu0().clone()).expect("stats build");
        let closed = log_lnml_closed(&stats, &lp).expect("closed form evaluates");
        prop_assert!((coder.accumulated_nats() + closed).abs() <= 1e-9);
    }

    /// Segment costs from cached prefix statistics match direct
    /// recomputation on the slice.
    #[test]
    fn prefix_costs_match_direct_slices((lp, x) in problem(14), seed in any::<u64>()) {
        let costs = SegmentCosts::new(&x, &lp).expect("costs build");
        let mut rng = common::rng(seed);
        let n = x.n();
        for _ in 0..4 {
            let a = common::uniform(&mut rng, 0.0, n as f64) as usize;
            let b = 1 + a + common::uniform(&mut rng, 0.0, (n - a) as f64) as usize;
            let (a, b) = (a.min(n - 1), b.min(n));
            let cached = costs.cost(a, b).expect("segment is admissible");
            let direct = segment_cost(&x, a, b, &lp).expect("segment is admissible");
            prop_assert!((cached - direct).abs() <= 1e-9 * (1.0 + cached.abs()));
        }
    }

    /// The capacity never reads μ₀: moving the location leaves ln C
    /// bit-identical.
    #[test]
    fn capacity_ignores_location((lp, x) in problem(10), shift in prop::collection::vec(-50.0f64..50.0, 3)) {
        let m = lp.m();
        let moved = LuckinessParams::new(
            lp.nu(),
            DVector::from_fn(m, |i, _| shift[i]),
            lp.sigma0().clone(),
            lp.rho2(),
        ).expect("moved parameters stay valid");
        let here = log_capacity_general(m, x.n(), &lp).expect("capacity evaluates");
        let there = log_capacity_general(m, x.n(), &moved).expect("capacity evaluates");
        prop_assert_eq!(here, there);
    }

    /// The multivariate-t log-density is symmetric about its location.
    #[test]
    fn mvt_logpdf_is_symmetric(
        m in 1usize..=3,
        dof in 0.5f64..8.0,
        raw_loc in prop::collection::vec(-3.0f64..3.0, 3),
        raw_scale in prop::collection::vec(-1.0f64..1.0, 9),
        raw_d in prop::collection::vec(-4.0f64..4.0, 3),
    ) {
        let location = DVector::from_fn(m, |i, _| raw_loc[i]);
        let a = DMatrix::from_fn(m, m, |i, j| raw_scale[3 * i + j]);
        let scale = &a * a.transpose() + DMatrix::identity(m, m) * 0.3;
        let p = PredictiveT::new(dof, location.clone(), scale).expect("scale is PD");
        let d = DVector::from_fn(m, |i, _| raw_d[i]);
        let up = log_mvt_pdf(&(&location + &d), &p).expect("density evaluates");
        let down = log_mvt_pdf(&(&location - &d), &p).expect("density evaluates");
        prop_assert!((up - down).abs() <= 1e-12 * (1.0 + up.abs()));
    }

    /// A reported single change always lies in the admissible window, and
    /// its two-part total actually beats the unsplit cost.
    #[test]
    fn single_change_is_admissible_and_improving((lp, x) in problem(16), min_seg in 1usize..=3) {
        prop_assume!(x.n() >= 2 * min_seg);
        let n = x.n();
        if let Some(k) = detect_single_change(&x, &lp, min_seg).expect("detector runs") {
            prop_assert!(k >= min_seg && k <= n - min_seg);
            let costs = SegmentCosts::new(&x, &lp).expect("costs build");
            let split_total = ((n - 1) as f64).ln()
                + costs.cost(0, k).expect("left segment is admissible")
                + costs.cost(k, n).expect("right segment is admissible");
            prop_assert!(split_total < costs.cost(0, n).expect("whole range is admissible"));
        }
    }

    /// Multi-change output is internally consistent: sorted admissible
    /// boundaries, per-segment costs that re-sum to the reported total.
    #[test]
    fn segmentation_report_is_consistent((lp, x) in problem(16), min_seg in 1usize..=2, max_splits in 0usize..=3) {
        prop_assume!(x.n() >= min_seg);
        let n = x.n();
        let seg = detect_multi_change(&x, &lp, min_seg, max_splits).expect("DP runs");

        prop_assert!(seg.boundaries.len() <= max_splits);
        let mut previous = 0usize;
        for &b in &seg.boundaries {
            prop_assert!(b >= previous + min_seg && b <= n - min_seg);
            previous = b;
        }
        prop_assert!(n - previous >= min_seg);

        prop_assert_eq!(seg.segment_nats.len(), seg.boundaries.len() + 1);
        let split_code = if n > 1 { ((n - 1) as f64).ln() } else { 0.0 };
        let count_code = ((max_splits + 1) as f64).ln();
        let resummed = seg.segment_nats.iter().fold(0.0, |acc, &c| acc + c)
            + seg.boundaries.len() as f64 * split_code
            + count_code;
        prop_assert!((resummed - seg.total_nats).abs() <= 1e-12 * (1.0 + seg.total_nats.abs()));
    }
}
