use std::f64::consts::PI;

use proptest::prelude::*;

use spectral_lab::{
    check_orthogonal_combinatorial, fmt_g17, gram_matrix, q_lambda_truncated, spectrum_window,
    summation_identity_residual, BetaFamily, Point2, SelfAffineSystem,
};

fn families() -> Vec<BetaFamily> {
    vec![
        BetaFamily::Zero,
        BetaFamily::Linear,
        BetaFamily::power_law(0.3).unwrap(),
        BetaFamily::power_law_scaled(1.0, 2.0).unwrap(),
        BetaFamily::exponential(3.0).unwrap(),
        BetaFamily::power_log(0.8).unwrap(),
        BetaFamily::density_calibrated(0.5, 3.0).unwrap(),
    ]
}

#[test]
fn identity_residual_bound_on_grid() {
    for big_n in [100usize, 1_000, 10_000] {
        for i in 1..100 {
            let xi1 = i as f64 / 100.0;
            let r = summation_identity_residual(xi1, big_n).unwrap();
            assert!(r <= 3.0 / big_n as f64, "xi1={} N={}: {}", xi1, big_n, r);
        }
    }
    assert!((PI * PI / 1.0 - 9.8696044).abs() < 1e-7);
}

#[test]
fn windows_are_orthogonal_for_every_family() {
    let sys = SelfAffineSystem::standard();
    for f in families() {
        let pts = spectrum_window(&f, 60).unwrap();
        assert!(check_orthogonal_combinatorial(&pts).unwrap().passed);
        let g = gram_matrix(&sys, &pts).unwrap();
        assert_eq!(g.max_off_diagonal(), 0.0);
        assert_eq!(g.max_diagonal_deviation(), 0.0);
    }
}

fn frac_away_from_integers() -> impl Strategy<Value = f64> {
    (-3i32..3, 0.001f64..0.999).prop_map(|(k, f)| k as f64 + f)
}

proptest! {
    #[test]
    fn q_is_beta_independent(xi1 in frac_away_from_integers(), xi2 in -10.0f64..10.0, i in 0usize..7, j in 0usize..7) {
        let sys = SelfAffineSystem::standard();
        let fams = families();
        let a = q_lambda_truncated(&sys, &fams[i], Point2::new(xi1, xi2), 500).unwrap();
        let b = q_lambda_truncated(&sys, &fams[j], Point2::new(xi1, -xi2), 500).unwrap();
        prop_assert_eq!(a.partial_sum.to_bits(), b.partial_sum.to_bits());
    }

    #[test]
    fn deficit_is_covered_by_tail(xi1 in frac_away_from_integers(), n in 2usize..3000) {
        let sys = SelfAffineSystem::standard();
        let r = q_lambda_truncated(&sys, &BetaFamily::Linear, Point2::new(xi1, 0.0), n).unwrap();
        let deficit = 1.0 - r.partial_sum;
        prop_assert!(deficit >= -1e-12, "{:?}", r);
        prop_assert!(deficit <= r.tail_bound + 1e-12, "{:?}", r);
        prop_assert!(r.tail_bound > 0.0);
        prop_assert!(r.passed);
    }

    #[test]
    fn combinatorial_check_detects_repeats(firsts in proptest::collection::vec(-20i64..20, 1..30), seconds in proptest::collection::vec(-5.0f64..5.0, 30)) {
        let pts: Vec<Point2> = firsts.iter().zip(&seconds).map(|(&n, &b)| Point2::new(n as f64, b)).collect();
        let mut sorted = firsts.clone();
        sorted.sort();
        sorted.dedup();
        let report = check_orthogonal_combinatorial(&pts).unwrap();
        prop_assert_eq!(report.passed, sorted.len() == firsts.len());
        prop_assert_eq!(report.colliding_pair.is_some(), !report.passed);
    }

    #[test]
    fn product_matches_closed_form(x1 in -16.0f64..16.0, x2 in -10.0f64..10.0) {
        let sys = SelfAffineSystem::standard();
        let xi = Point2::new(x1, x2);
        let d = (sys.fourier_product(xi, 40).unwrap() - sys.fourier_closed_form(xi).unwrap()).norm();
        prop_assert!(d <= 1e-9);
    }

    #[test]
    fn g17_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
        prop_assert_eq!(fmt_g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn window_has_2n_plus_1_rows(n in 0u64..300, i in 0usize..7) {
        let pts = spectrum_window(&families()[i], n).unwrap();
        prop_assert_eq!(pts.len() as u64, 2 * n + 1);
    }
}
