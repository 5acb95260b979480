use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_lab::density::{centers_for, counting_profile};
use spectral_lab::{
    beurling_dimension, brute_force_count, count_in_ball, upper_beurling_density, BetaFamily,
    CenterPolicy, Point2, RadiusSchedule,
};

fn builtin(index: usize, p: f64, q: f64) -> BetaFamily {
    // p, q in [0, 1)
    let t_open = 0.05 + 0.9 * p;
    let t_closed = 0.05 + 0.95 * p;
    let a = 1.1 + 7.0 * q;
    match index % 7 {
        0 => BetaFamily::Zero,
        1 => BetaFamily::Linear,
        2 => BetaFamily::power_law(t_open).unwrap(),
        3 => BetaFamily::power_law_scaled(t_closed, a).unwrap(),
        4 => BetaFamily::exponential(a).unwrap(),
        5 => BetaFamily::power_log(t_closed).unwrap(),
        _ => BetaFamily::density_calibrated(t_closed, 0.2 + 6.0 * q).unwrap(),
    }
}

fn families() -> Vec<BetaFamily> {
    vec![
        BetaFamily::Zero,
        BetaFamily::Linear,
        BetaFamily::power_law(0.5).unwrap(),
        BetaFamily::power_law_scaled(0.5, 4.0).unwrap(),
        BetaFamily::exponential(2.0).unwrap(),
        BetaFamily::power_log(0.5).unwrap(),
        BetaFamily::density_calibrated(0.7, 2.0).unwrap(),
    ]
}

/// Cap that covers the ball through `|n - c1| >= h` alone.
fn horizontal_cap(center: Point2, h: f64) -> u64 {
    (center.x1.abs() + h).ceil() as u64 + 1
}

#[test]
fn oracle_equivalence_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260311);
    for i in 0..1000 {
        let family = builtin(i, rng.gen(), rng.gen());
        let h = 10f64.powf(rng.gen_range(0.0..4.0));
        let center = if i % 3 == 0 {
            Point2::ORIGIN
        } else {
            Point2::new(rng.gen_range(-h..h), rng.gen_range(-h..h))
        };
        let fast = count_in_ball(&family, center, h).unwrap();
        let slow = brute_force_count(&family, center, h, horizontal_cap(center, h)).unwrap();
        assert_eq!(
            fast, slow,
            "{} at ({}, {}) h={}",
            family, center.x1, center.x2, h
        );
    }
}

#[test]
fn integer_arithmetic_oracle_for_linear_and_zero() {
    // n^2 + (n - c)^2 < h^2 with integer data is decided exactly in i128
    for h in 1..=300i128 {
        for c in [-7i128, 0, 3] {
            let linear = (-h - 10..=h + 10)
                .filter(|&n| (n - c) * (n - c) + n * n < h * h)
                .count() as u128;
            let zero = (-h - 10..=h + 10)
                .filter(|&n| (n - c) * (n - c) < h * h)
                .count() as u128;
            let center = Point2::new(c as f64, 0.0);
            assert_eq!(
                count_in_ball(&BetaFamily::Linear, center, h as f64).unwrap(),
                linear
            );
            assert_eq!(
                count_in_ball(&BetaFamily::Zero, center, h as f64).unwrap(),
                zero
            );
        }
    }
}

#[test]
fn centered_maximality() {
    let sched = RadiusSchedule::default();
    for family in families() {
        let sched = if matches!(family, BetaFamily::Exponential { .. }) {
            RadiusSchedule::exponential_default()
        } else {
            sched
        };
        let policy = CenterPolicy::Randomized {
            count: 100,
            seed: 7,
        };
        for h in sched.radii() {
            let at_origin = count_in_ball(&family, Point2::ORIGIN, h).unwrap();
            for c in centers_for(&policy, &family, h).unwrap() {
                let n = count_in_ball(&family, c, h).unwrap();
                assert!(
                    n <= at_origin + 2,
                    "{} h={} centre ({}, {}): {} vs {}",
                    family,
                    h,
                    c.x1,
                    c.x2,
                    n,
                    at_origin
                );
            }
        }
    }
}

#[test]
fn lattice_centers_never_beat_origin_by_more_than_two() {
    let sched = RadiusSchedule::new(10.0, 3.0, 8).unwrap();
    let policy = CenterPolicy::LatticeWindow { half_width: 3 };
    for family in families() {
        for h in sched.radii() {
            let at_origin = count_in_ball(&family, Point2::ORIGIN, h).unwrap();
            for c in centers_for(&policy, &family, h).unwrap() {
                assert!(count_in_ball(&family, c, h).unwrap() <= at_origin + 2);
            }
        }
    }
}

#[test]
fn exponential_density_at_zero_grows_without_bound() {
    for (a, log2_h_max) in [
        (1.5, 100.0),
        (2.0, 100.0),
        (3.0, 100.0),
        (4.0, 200.0),
        (8.0, 200.0),
    ] {
        let family = BetaFamily::exponential(a).unwrap();
        let sched = RadiusSchedule::log2(10.0, (log2_h_max - 10.0) / 19.0, 20).unwrap();
        let profile = counting_profile(&family, Point2::ORIGIN, &sched).unwrap();
        let first = profile.samples[0].count;
        let last = profile.samples[19].count;
        assert!(last > first, "a={}", a);
        assert!(last >= 100, "a={}: {}", a, last);
        let d = upper_beurling_density(&family, 0.0, &sched, &CenterPolicy::Origin).unwrap();
        assert_eq!(d.value, last as f64);
    }
}

#[test]
fn scaled_family_shares_dimension() {
    let sched = RadiusSchedule::default();
    let scales = [1.5, 2.0, 4.0, 8.0];
    let dims: Vec<f64> = scales
        .iter()
        .map(|&a| {
            let f = BetaFamily::power_law_scaled(0.5, a).unwrap();
            beurling_dimension(&f, &sched, &CenterPolicy::Origin)
                .unwrap()
                .slope_fit
        })
        .collect();
    for x in &dims {
        for y in &dims {
            assert!((x - y).abs() <= 0.03, "{:?}", dims);
        }
    }
    let firsts: Vec<f64> = scales
        .iter()
        .map(|&a| {
            BetaFamily::power_law_scaled(0.5, a)
                .unwrap()
                .eval(1)
                .unwrap()
        })
        .collect();
    for i in 0..4 {
        for j in i + 1..4 {
            assert_ne!(firsts[i], firsts[j]);
        }
    }
}

#[test]
fn beurling_and_banach_agree_on_builtins() {
    for family in families() {
        let sched = RadiusSchedule::default_for(&family);
        let banach = spectral_lab::banach_dimension(&family, &sched).unwrap();
        let beurling = beurling_dimension(
            &family,
            &sched,
            &CenterPolicy::Randomized {
                count: 100,
                seed: 3,
            },
        )
        .unwrap();
        assert!(
            (banach.slope_fit - beurling.slope_fit).abs() <= 0.02,
            "{}",
            family
        );
        for est in [
            banach.slope_fit,
            banach.bisection,
            beurling.slope_fit,
            beurling.bisection,
        ] {
            assert!((-0.1..=2.1).contains(&est), "{}: {}", family, est);
        }
    }
}

#[test]
fn custom_beta_uses_random_centers() {
    let table = (-5000..=5000).map(|n| (n, (n as f64) * 0.5)).collect();
    let family = BetaFamily::Custom(spectral_lab::CustomBeta::from_table("half", table));
    let policy = CenterPolicy::default_for(&family, 11);
    assert!(matches!(policy, CenterPolicy::Randomized { .. }));
    let sched = RadiusSchedule::new(10.0, 1.5, 8).unwrap();
    let d = beurling_dimension(&family, &sched, &policy).unwrap();
    assert!((d.slope_fit - 1.0).abs() < 0.05, "{:?}", d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn count_is_monotone_in_h(
        idx in 0usize..7, p in 0.0f64..1.0, q in 0.0f64..1.0,
        cx in -50.0f64..50.0, cy in -50.0f64..50.0,
        h in 0.5f64..2000.0, grow in 1.0f64..3.0,
    ) {
        let family = builtin(idx, p, q);
        let c = Point2::new(cx, cy);
        let small = count_in_ball(&family, c, h).unwrap();
        let large = count_in_ball(&family, c, h * grow).unwrap();
        prop_assert!(small <= large);
    }

    #[test]
    fn fast_count_matches_enumeration(
        idx in 0usize..7, p in 0.0f64..1.0, q in 0.0f64..1.0,
        cx in -1.0f64..1.0, cy in -1.0f64..1.0, h in 1.0f64..3000.0,
    ) {
        let family = builtin(idx, p, q);
        let c = Point2::new(cx * h, cy * h);
        let cap = horizontal_cap(c, h);
        prop_assert_eq!(count_in_ball(&family, c, h).unwrap(), brute_force_count(&family, c, h, cap).unwrap());
    }

    #[test]
    fn origin_count_is_odd(idx in 0usize..7, p in 0.0f64..1.0, q in 0.0f64..1.0, h in 0.1f64..1e6) {
        let family = builtin(idx, p, q);
        prop_assert_eq!(count_in_ball(&family, Point2::ORIGIN, h).unwrap() % 2, 1);
    }
}
