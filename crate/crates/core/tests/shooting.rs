use lvim::compare::max_discrepancy;
use lvim::problems::LoadType;
use lvim::shooting::{
    shoot_scalar, solve_buckled_bar, ShootingOptions, ShotIntegrator, DEAD_LOAD_P50_GUESSES,
    FOLLOWER_GUESSES,
};
use proptest::prelude::*;

fn dead_load_options(load: f64) -> ShootingOptions {
    ShootingOptions {
        window: Some((0.0, 2.0 * load.sqrt())),
        ..ShootingOptions::default()
    }
}

#[test]
fn dead_load_has_two_distinct_solutions() {
    let opts = dead_load_options(50.0);
    let mut slopes = Vec::new();
    for guesses in DEAD_LOAD_P50_GUESSES {
        let r = solve_buckled_bar(LoadType::Dead, 50.0, guesses, &opts, &ShotIntegrator::lvim_default()).unwrap();
        assert!(r.residual < 1e-10);
        assert_eq!(r.trajectory.states[0][0], 0.0);
        // energy of the elastica: ½θ′² − P cos θ is constant along the bar
        let e = |s: &[f64]| 0.5 * s[1] * s[1] - 50.0 * s[0].cos();
        let e0 = e(&r.trajectory.states[0]);
        for s in &r.trajectory.states {
            assert!((e(s) - e0).abs() < 1e-6 * e0.abs(), "{} vs {e0}", e(s));
        }
        // θ′(1) = 0 pins the tip angle: ½θ′(0)² = P (1 − cos θ(1))
        let tip = r.tip_angle();
        assert!((0.5 * r.theta_prime_0.powi(2) - 50.0 * (1.0 - tip.cos())).abs() < 1e-4);
        slopes.push(r.theta_prime_0);
    }
    assert!((slopes[0] - slopes[1]).abs() > 0.5, "{slopes:?}");
}

#[test]
fn lvim_and_oracle_shots_agree() {
    let opts = dead_load_options(50.0);
    for guesses in DEAD_LOAD_P50_GUESSES {
        let a = solve_buckled_bar(LoadType::Dead, 50.0, guesses, &opts, &ShotIntegrator::lvim_default()).unwrap();
        let b = solve_buckled_bar(LoadType::Dead, 50.0, guesses, &opts, &ShotIntegrator::rk_default()).unwrap();
        assert!((a.theta_prime_0 - b.theta_prime_0).abs() < 1e-6);
        assert!(max_discrepancy(&a.trajectory, &b.trajectory).unwrap()[0] < 1e-6);
    }
}

#[test]
fn follower_loads_reach_a_consistent_tip_angle() {
    for lt in [LoadType::PerpendicularFollower, LoadType::TangentFollower] {
        let r = solve_buckled_bar(
            lt,
            25.0,
            FOLLOWER_GUESSES,
            &ShootingOptions::default(),
            &ShotIntegrator::lvim_default(),
        )
        .unwrap();
        assert!((r.alpha - r.tip_angle()).abs() < 1e-10, "{lt}");
        assert!(r.residual < 1e-10);
        assert!(r.outer_iters >= 1 && r.inner_iters >= 2);
    }
}

#[test]
fn negative_load_is_rejected() {
    let err = solve_buckled_bar(
        LoadType::Dead,
        -1.0,
        (1.0, 2.0),
        &ShootingOptions::default(),
        &ShotIntegrator::lvim_default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("load"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn secant_finds_cubic_roots(root in -3.0f64..3.0, k in 0.5f64..4.0) {
        let f = move |v: f64| Ok(k * (v - root) + (v - root).powi(3));
        let r = shoot_scalar(&mut { f }, root - 1.0, root + 0.7, 1e-12, 100, None).unwrap();
        prop_assert!((r.root - root).abs() < 1e-10);
    }

    #[test]
    fn window_keeps_iterates_inside(root in 0.5f64..3.5, start in 0.1f64..0.4) {
        let mut seen = Vec::new();
        let mut f = |v: f64| {
            seen.push(v);
            Ok((v - root).atan())
        };
        let r = shoot_scalar(&mut f, start, 3.9, 1e-12, 300, Some((0.0, 4.0))).unwrap();
        prop_assert!((r.root - root).abs() < 1e-10);
        prop_assert!(seen.iter().all(|v| *v > 0.0 && *v < 4.0));
    }
}
