use arms_core::envelope::PieceForm;
use arms_core::{
    discrepancy, mh_alpha, Mixture, Procedure, Proposal, QuadratureGrid, Support,
};
use proptest::prelude::*;

fn support_points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-9.5f64..9.5, 2..12).prop_map(|mut v| {
        v.push(-10.0);
        v.push(10.0);
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        v
    })
}

fn interval_procedures() -> impl Strategy<Value = Procedure> {
    prop::sample::select(vec![
        Procedure::ArmsHull,
        Procedure::Polyline,
        Procedure::Staircase,
        Procedure::Trapezoid,
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn proposals_are_proper(pts in support_points(), proc in interval_procedures()) {
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, proc, &target) else { return Ok(()) };
        let pieces = prop.pieces();
        for w in pieces.windows(2) {
            prop_assert_eq!(w[0].hi, w[1].lo);
        }
        for p in pieces {
            prop_assert!(p.area.is_finite() && p.area >= 0.0);
        }
        prop_assert!(prop.total_mass() > 0.0 && prop.total_mass().is_finite());
    }

    #[test]
    fn support_values_are_respected(pts in support_points(), proc in interval_procedures()) {
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, proc, &target) else { return Ok(()) };
        for (&x, &v) in s.points().iter().zip(s.values()) {
            let w = prop.log_eval(x).unwrap();
            match proc {
                // interpolating constructions pass through (s_j, V(s_j))
                Procedure::Polyline | Procedure::Trapezoid => prop_assert!((w - v).abs() < 1e-9 * v.abs().max(1.0)),
                Procedure::Staircase => prop_assert!(w >= v - 1e-12),
                _ => {}
            }
        }
    }

    #[test]
    fn samples_stay_in_their_piece(pts in support_points(), proc in interval_procedures(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, proc, &target) else { return Ok(()) };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let (x, w) = prop.sample(&mut rng);
            prop_assert!(x.is_finite() && w.is_finite());
        }
    }

    #[test]
    fn alpha_is_a_probability(a in -50.0f64..5.0, b in -50.0f64..5.0, c in -50.0f64..5.0, d in -50.0f64..5.0) {
        let alpha = mh_alpha(a, b, c, d);
        prop_assert!((0.0..=1.0).contains(&alpha));
        if c >= a && d >= b {
            prop_assert_eq!(alpha, 1.0);
        }
    }

    #[test]
    fn insertion_keeps_support_sorted_and_separated(xs in prop::collection::vec(-30.0f64..30.0, 1..60)) {
        let target = Mixture::benchmark();
        let mut s = Support::new([0.0], &target).unwrap();
        for x in xs {
            let _ = s.insert(x, &target);
        }
        for w in s.points().windows(2) {
            prop_assert!(w[0] < w[1]);
            prop_assert!(w[1] - w[0] >= arms_core::envelope::duplicate_tolerance(w[0]));
        }
    }

    #[test]
    fn beta_zero_inflation_is_identity(pts in support_points(), t in 0u64..1000) {
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, Procedure::ArmsHull, &target) else { return Ok(()) };
        prop_assert_eq!(prop.inflate_tails(0.0, 0.5, t).unwrap(), prop.clone());
        let wide = prop.inflate_tails(0.5, 0.01, t).unwrap();
        prop_assert!(wide.total_mass() >= prop.total_mass());
    }
}

// Trapezoid error bound for the proposal on `grid`: h/2 per unit of jump at each
// breakpoint, plus h^2/12 * slope^2 * area over each exponential piece.
fn quadrature_slack(prop: &Proposal, grid: &QuadratureGrid<f64>) -> f64 {
    let h = grid.spacing();
    let pieces = prop.pieces();
    let jumps: f64 = pieces
        .windows(2)
        .filter(|w| w[0].hi > grid.lo && w[0].hi < grid.hi)
        .map(|w| (w[0].log_eval(w[0].hi).exp() - w[1].log_eval(w[1].lo).exp()).abs())
        .sum();
    let curvature: f64 = pieces
        .iter()
        .map(|p| match p.form {
            PieceForm::ExpLinear(line) => line.slope * line.slope * p.area,
            _ => 0.0,
        })
        .sum();
    h / 2.0 * jumps + h * h / 12.0 * curvature + 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrepancy_bounds_the_mass_gap(pts in support_points(), proc in interval_procedures()) {
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, proc, &target) else { return Ok(()) };
        let grid = QuadratureGrid::benchmark();
        let d = discrepancy(&prop, &target, &grid).unwrap();
        prop_assert!(d >= 0.0);
        let slack = quadrature_slack(&prop, &grid);
        prop_assert!(d >= (prop.total_mass() - 1.0).abs() - slack, "{} vs {} (slack {})", d, prop.total_mass(), slack);
    }

    #[test]
    fn discrepancy_converges_with_grid_refinement(pts in support_points(), proc in interval_procedures()) {
        let target = Mixture::benchmark();
        let s = Support::new(pts, &target).unwrap();
        let Ok(prop) = Proposal::build(&s, proc, &target) else { return Ok(()) };
        let coarse = QuadratureGrid::benchmark();
        let fine = QuadratureGrid::new(coarse.lo, coarse.hi, 2 * coarse.n_points - 1).unwrap();
        let (a, b) = (discrepancy(&prop, &target, &coarse).unwrap(), discrepancy(&prop, &target, &fine).unwrap());
        let slack = quadrature_slack(&prop, &coarse) + quadrature_slack(&prop, &fine);
        prop_assert!((a - b).abs() <= 1e-3 * b.max(1e-12) + slack, "{} vs {} (slack {})", a, b, slack);
    }
}
