use std::f64::consts::PI;

use lvim::compare::{compare_problem, invariant_drift};
use lvim::lvim::{march, SolverConfig};
use lvim::problems::{
    blasius_pair, buckled_bar, defaults_for, elastica, gravity_accel, gravity_potential, leo,
    mathieu, pendulum, pendulum_frequency_sweep, white_dwarf, GravityModel, LoadType,
    Stage1Solver, DEFAULTS, PROBLEM_NAMES,
};
use lvim::rk::{rk45_integrate, RkConfig};
use lvim::system::jacobian_mismatch;
use proptest::prelude::*;

fn synthetic() -> GravityModel {
    GravityModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_deg8.txt")).unwrap()
}

/// Complete elliptic integral of the first kind by the arithmetic-geometric mean.
fn elliptic_k(k: f64) -> f64 {
    let (mut a, mut b) = (1.0, (1.0 - k * k).sqrt());
    for _ in 0..40 {
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (2.0 * a)
}

#[test]
fn defaults_table_is_complete() {
    assert_eq!(DEFAULTS.len(), PROBLEM_NAMES.len());
    for name in PROBLEM_NAMES {
        let d = defaults_for(name).unwrap();
        d.solver_config().validate().unwrap();
        d.rk_config().validate().unwrap();
    }
    let err = defaults_for("nope").unwrap_err().to_string();
    assert!(err.contains("pendulum"));
}

#[test]
fn jacobians_match_finite_differences_along_trajectories() {
    let specs = vec![
        pendulum(1.0).unwrap(),
        mathieu(0.5, 1.0).unwrap(),
        white_dwarf(0.3, 1e-3).unwrap(),
        blasius_pair(10.0, Stage1Solver::rk_default()).unwrap().1,
        buckled_bar(LoadType::Dead, 50.0, 0.0).unwrap(),
        buckled_bar(LoadType::PerpendicularFollower, 25.0, 0.4).unwrap(),
        buckled_bar(LoadType::TangentFollower, 25.0, -0.3).unwrap(),
    ];
    for spec in specs {
        let x0 = if spec.name == "buckled-bar" { vec![0.0, 3.0] } else { spec.x0.clone() };
        let out = lvim::rk::rk45_partial(spec.system.as_ref(), spec.t0, spec.tf, &x0, &RkConfig::default()).unwrap();
        let tr = out.trajectory;
        // stay clear of the white dwarf's boundary, where the stencil leaves the domain
        let usable = tr.len() * 9 / 10;
        let stride = (usable / 20).max(1);
        for i in (0..usable).step_by(stride) {
            let m = jacobian_mismatch(spec.system.as_ref(), tr.times[i], &tr.states[i]).unwrap();
            assert!(m < 1e-6, "{} at t = {}: {m}", spec.name, tr.times[i]);
        }
    }
}

#[test]
fn pendulum_frequency_matches_elliptic_integral() {
    let amps = [0.3, 1.0, 2.0, 2.8];
    for (a, freq) in pendulum_frequency_sweep(&amps).unwrap() {
        let exact = PI / (2.0 * elliptic_k((a / 2.0).sin()));
        assert!((freq - exact).abs() < 1e-8, "amplitude {a}: {freq} vs {exact}");
    }
    assert!(pendulum_frequency_sweep(&[PI]).is_err());
}

#[test]
fn pendulum_energy_is_conserved() {
    let p = pendulum(1.0).unwrap();
    let tr = march(p.system.as_ref(), p.t0, p.tf, &p.x0, &p.lvim_defaults).unwrap();
    assert!(invariant_drift(p.invariant.as_ref().unwrap(), &tr).unwrap() < 1e-8);
}

#[test]
fn white_dwarf_stops_at_the_boundary() {
    let w = white_dwarf(0.3, 1e-3).unwrap();
    let c = compare_problem(&w, &w.lvim_defaults, &w.rk_defaults).unwrap();
    assert!(c.lvim_stop.as_ref().unwrap().is_domain_violation());
    assert!(c.oracle_stop.as_ref().unwrap().is_domain_violation());
    let phi_end = c.oracle.final_state()[0];
    assert!(phi_end * phi_end - 0.3 < 1e-3);
    assert!(c.lvim.t_end() > 3.0 && c.lvim.t_end() <= c.oracle.t_end());
}

#[test]
fn blasius_is_insensitive_to_the_truncation() {
    // F grows linearly, so the longer truncation needs shorter segments
    let stage1 = Stage1Solver::Lvim(SolverConfig::new(5, 0.1, 1e-10));
    let (a, _) = blasius_pair(10.0, stage1).unwrap();
    let (b, _) = blasius_pair(20.0, stage1).unwrap();
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    assert!((a - 0.332057336).abs() < 1e-8);
}

#[test]
fn elastica_is_odd_and_matches_the_oracle() {
    let spec = elastica(1.0, 1.2, 0.1).unwrap();
    let mut out = [0.0];
    let mut back = [0.0];
    for x in [0.1, 0.5, 1.0] {
        spec.system.rhs(x, &[0.0], &mut out).unwrap();
        spec.system.rhs(-x, &[0.0], &mut back).unwrap();
        assert_eq!(out, back);
    }
    let fine = SolverConfig::new(13, 0.03, 1e-13);
    let lv = march(spec.system.as_ref(), 0.0, 1.0, &spec.x0, &fine).unwrap();
    let rk = rk45_integrate(spec.system.as_ref(), 0.0, 1.0, &spec.x0, &RkConfig::default()).unwrap();
    assert!((lv.final_state()[0] - rk.final_state()[0]).abs() < 1e-10);
    assert!(spec.system.rhs(1.3, &[0.0], &mut out).unwrap_err().is_domain_violation());
}

#[test]
fn degree_zero_field_is_a_point_mass() {
    let m = synthetic().truncated(0).unwrap();
    let q = [7.0e6, -1.0e6, 2.0e6];
    let a = gravity_accel(&m, &q).unwrap();
    let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    for k in 0..3 {
        let exact = -m.mu * q[k] / (r * r * r);
        assert!((a[k] - exact).abs() < 1e-15 * exact.abs().max(1e-3));
    }
    assert!((gravity_potential(&m, &q).unwrap() + m.mu / r).abs() < 1e-12 * m.mu / r);
}

#[test]
fn zeroed_top_degree_reproduces_the_lower_model() {
    let full = synthetic();
    let mut zeroed = full.clone();
    for m in 0..=8 {
        zeroed = zeroed.with_coefficient(8, m, 0.0, 0.0).unwrap();
    }
    let lower = full.truncated(7).unwrap();
    let q = [-0.3889e6, 7.7388e6, 0.6736e6];
    let a = gravity_accel(&zeroed, &q).unwrap();
    let b = gravity_accel(&lower, &q).unwrap();
    for k in 0..3 {
        assert!((a[k] - b[k]).abs() <= 1e-15 * a[k].abs(), "{a:?} vs {b:?}");
    }
}

#[test]
fn position_inside_the_reference_sphere_is_rejected() {
    let m = synthetic();
    assert!(gravity_accel(&m, &[1.0e6, 0.0, 0.0]).unwrap_err().is_domain_violation());
}

#[test]
fn leo_conserves_energy_at_degree_eight() {
    let spec = leo(&synthetic()).unwrap();
    assert!((spec.tf - 6826.0).abs() < 1.0);
    let tr = march(spec.system.as_ref(), spec.t0, spec.tf, &spec.x0, &spec.lvim_defaults).unwrap();
    assert!(invariant_drift(spec.invariant.as_ref().unwrap(), &tr).unwrap() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn acceleration_is_the_gradient_of_the_potential(
        lat in -1.5f64..1.5,
        lon in -3.1f64..3.1,
        alt in 2.0e5f64..2.0e6,
    ) {
        let m = synthetic();
        let r = m.r_ref + alt;
        let q = [r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin()];
        let a = gravity_accel(&m, &q).unwrap();
        let h = 1.0;
        for k in 0..3 {
            let mut up = q;
            let mut dn = q;
            up[k] += h;
            dn[k] -= h;
            let du = (gravity_potential(&m, &up).unwrap() - gravity_potential(&m, &dn).unwrap()) / (2.0 * h);
            // acceleration is −∇U with U negative for a point mass
            prop_assert!((a[k] + du).abs() < 1e-6 * (m.mu / (r * r)), "k = {}: {} vs {}", k, a[k], -du);
        }
    }

    #[test]
    fn acceleration_field_is_curl_free(
        lat in -1.4f64..1.4,
        lon in -3.1f64..3.1,
        alt in 3.0e5f64..1.5e6,
    ) {
        let m = synthetic();
        let r = m.r_ref + alt;
        let q = [r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin()];
        let h = 10.0;
        let mut grad = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut up = q;
            let mut dn = q;
            up[c] += h;
            dn[c] -= h;
            let au = gravity_accel(&m, &up).unwrap();
            let ad = gravity_accel(&m, &dn).unwrap();
            for i in 0..3 {
                grad[i][c] = (au[i] - ad[i]) / (2.0 * h);
            }
        }
        let scale = m.mu / (r * r * r);
        for i in 0..3 {
            for c in 0..3 {
                prop_assert!((grad[i][c] - grad[c][i]).abs() < 1e-7 * scale);
            }
        }
    }

    #[test]
    fn bar_jacobians_match_finite_differences(
        theta in -3.0f64..3.0,
        dtheta in -5.0f64..5.0,
        load in 0.0f64..60.0,
        alpha in -1.5f64..1.5,
    ) {
        for lt in LoadType::ALL {
            let spec = buckled_bar(lt, load, alpha).unwrap();
            prop_assert!(jacobian_mismatch(spec.system.as_ref(), 0.5, &[theta, dtheta]).unwrap() < 1e-6);
        }
    }
}
