//! Shooting on the initial slope for the buckled bar, with an outer
//! fixed-point iteration on the tip angle for follower loads.

use crate::error::{Error, Result};
use crate::lvim::{march, SolverConfig};
use crate::problems::{buckled_bar, defaults_for, LoadType};
use crate::rk::{rk45_integrate, RkConfig};
use crate::trajectory::Trajectory;

/// Outer fixed-point sweeps allowed for follower loads.
const MAX_OUTER: usize = 50;
/// Relaxation of the tip-angle update.
const DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRoot {
    pub root: f64,
    pub residual: f64,
    pub shots: usize,
}

/// Secant iteration for `f(v) = 0` from `a`, `b`.
///
/// When `window` is given and a secant step leaves it (or the secant is
/// flat) the step falls back to bisection of the tightest sign change seen
/// so far. Without a sign change the iteration fails.
pub fn shoot_scalar(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    guess_a: f64,
    guess_b: f64,
    shoot_tol: f64,
    max_shots: usize,
    window: Option<(f64, f64)>,
) -> Result<ScalarRoot> {
    if guess_a == guess_b || !guess_a.is_finite() || !guess_b.is_finite() {
        return Err(Error::invalid(format!(
            "need two distinct finite guesses, got {guess_a} and {guess_b}"
        )));
    }
    if !(shoot_tol > 0.0) {
        return Err(Error::invalid("shoot_tol must be positive"));
    }
    let mut eval = |v: f64| {
        f(v).map_err(|e| Error::Shot {
            guess: v,
            source: Box::new(e),
        })
    };
    let (mut a, mut b) = (guess_a, guess_b);
    let mut fa = eval(a)?;
    let mut shots = 1;
    if fa.abs() < shoot_tol {
        return Ok(ScalarRoot { root: a, residual: fa, shots });
    }
    let mut fb = eval(b)?;
    shots += 1;
    // tightest sign change seen so far, as (lo, f(lo), hi, f(hi))
    let mut bracket = None;
    update_bracket(&mut bracket, (a, fa), (b, fb));

    while shots < max_shots {
        if fb.abs() < shoot_tol {
            return Ok(ScalarRoot { root: b, residual: fb, shots });
        }
        let mut next = b - fb * (b - a) / (fb - fa);
        let outside = window.is_some_and(|(lo, hi)| !(next > lo && next < hi));
        if !next.is_finite() || outside {
            let (lo, _, hi, _) = bracket.ok_or_else(|| Error::NoConvergence {
                iterations: shots,
                last_correction: fb.abs(),
                hint: "secant step left the slope window and no sign change is known; try other guesses".into(),
            })?;
            next = 0.5 * (lo + hi);
        }
        let fnext = eval(next)?;
        shots += 1;
        update_bracket(&mut bracket, (b, fb), (next, fnext));
        a = b;
        fa = fb;
        b = next;
        fb = fnext;
    }
    if fb.abs() < shoot_tol {
        return Ok(ScalarRoot { root: b, residual: fb, shots });
    }
    Err(Error::NoConvergence {
        iterations: shots,
        last_correction: fb.abs(),
        hint: "shot limit reached; try closer guesses".into(),
    })
}

type Bracket = Option<(f64, f64, f64, f64)>;

fn update_bracket(bracket: &mut Bracket, prev: (f64, f64), new: (f64, f64)) {
    let (x, fx) = new;
    match bracket {
        Some((lo, flo, hi, fhi)) if x > *lo && x < *hi => {
            if fx.signum() == flo.signum() {
                *lo = x;
                *flo = fx;
            } else {
                *hi = x;
                *fhi = fx;
            }
        }
        Some(_) => {}
        None => {
            let (p, fp) = prev;
            if fp.signum() != fx.signum() {
                *bracket = Some(if p < x { (p, fp, x, fx) } else { (x, fx, p, fp) });
            }
        }
    }
}

/// Integrator used for each shot.
#[derive(Debug, Clone, Copy)]
pub enum ShotIntegrator {
    Lvim(SolverConfig),
    Rk(RkConfig),
}

impl ShotIntegrator {
    pub fn lvim_default() -> Self {
        ShotIntegrator::Lvim(defaults_for("buckled-bar").expect("in table").solver_config())
    }

    pub fn rk_default() -> Self {
        ShotIntegrator::Rk(defaults_for("buckled-bar").expect("in table").rk_config())
    }
}

#[derive(Debug, Clone)]
pub struct ShotResult {
    pub load_type: LoadType,
    pub load: f64,
    pub theta_prime_0: f64,
    /// Tip angle used in the follower-load equation (the computed `θ(1)` for
    /// the dead load).
    pub alpha: f64,
    pub trajectory: Trajectory,
    /// `|θ′(1)|`
    pub residual: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
}

impl ShotResult {
    pub fn tip_angle(&self) -> f64 {
        self.trajectory.final_state()[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub shoot_tol: f64,
    pub max_shots: usize,
    /// Open interval the secant iterates must stay in.
    pub window: Option<(f64, f64)>,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            shoot_tol: 1e-10,
            max_shots: 60,
            window: None,
        }
    }
}

/// Guess pairs for the dead load at `P = 50` that lead to the two
/// non-trivial solutions with `θ′(0) < 2√P`.
pub const DEAD_LOAD_P50_GUESSES: [(f64, f64); 2] = [(12.5, 13.0), (14.14, 14.1421)];
/// Guess pair for the follower loads.
pub const FOLLOWER_GUESSES: (f64, f64) = (1.0, 2.0);

fn integrate(
    load_type: LoadType,
    load: f64,
    alpha: f64,
    slope: f64,
    integrator: &ShotIntegrator,
) -> Result<Trajectory> {
    let spec = buckled_bar(load_type, load, alpha)?;
    let x0 = [0.0, slope];
    match integrator {
        ShotIntegrator::Lvim(cfg) => march(spec.system.as_ref(), 0.0, 1.0, &x0, cfg),
        ShotIntegrator::Rk(cfg) => rk45_integrate(spec.system.as_ref(), 0.0, 1.0, &x0, cfg),
    }
}

/// Solves `θ″ = −P f(θ, α)`, `θ(0) = 0`, `θ′(1) = 0`.
///
/// Dead load: one secant search on `θ′(0)`. Follower loads: the tip angle
/// `α` is iterated as `α ← α + ½(θ(1) − α)` around an inner secant search,
/// each warm-started from the previous slope, until both `|θ′(1)|` and the
/// change of `α` fall below `shoot_tol`.
pub fn solve_buckled_bar(
    load_type: LoadType,
    load: f64,
    guesses: (f64, f64),
    options: &ShootingOptions,
    integrator: &ShotIntegrator,
) -> Result<ShotResult> {
    if !(load >= 0.0) {
        return Err(Error::invalid(format!("load must be non-negative, got {load}")));
    }
    let tol = options.shoot_tol;
    let inner = |alpha: f64, a: f64, b: f64| -> Result<ScalarRoot> {
        let mut residual =
            |v: f64| integrate(load_type, load, alpha, v, integrator).map(|t| t.final_state()[1]);
        shoot_scalar(&mut residual, a, b, tol, options.max_shots, options.window)
    };

    if !load_type.is_follower() {
        let root = inner(0.0, guesses.0, guesses.1)?;
        let trajectory = integrate(load_type, load, 0.0, root.root, integrator)?;
        let alpha = trajectory.final_state()[0];
        return Ok(ShotResult {
            load_type,
            load,
            theta_prime_0: root.root,
            alpha,
            residual: trajectory.final_state()[1].abs(),
            trajectory,
            outer_iters: 1,
            inner_iters: root.shots,
        });
    }

    let mut alpha = 0.0;
    let (mut ga, mut gb) = guesses;
    let mut inner_total = 0;
    for outer in 1..=MAX_OUTER {
        let root = inner(alpha, ga, gb)?;
        inner_total += root.shots;
        let trajectory = integrate(load_type, load, alpha, root.root, integrator)?;
        let tip = trajectory.final_state()[0];
        let residual = trajectory.final_state()[1].abs();
        if (tip - alpha).abs() < tol && residual < tol {
            return Ok(ShotResult {
                load_type,
                load,
                theta_prime_0: root.root,
                alpha,
                residual,
                trajectory,
                outer_iters: outer,
                inner_iters: inner_total,
            });
        }
        alpha += DAMPING * (tip - alpha);
        let step = (gb - ga).abs().min(1e-3 * root.root.abs().max(1e-3));
        ga = root.root;
        gb = root.root + step;
    }
    Err(Error::NoConvergence {
        iterations: MAX_OUTER,
        last_correction: f64::NAN,
        hint: "tip-angle iteration did not settle; try other guesses".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_root_in_one_secant_step() {
        let mut calls = 0;
        let r = shoot_scalar(
            &mut |v| {
                calls += 1;
                Ok(v - 2.0)
            },
            0.0,
            1.0,
            1e-12,
            10,
            None,
        )
        .unwrap();
        assert_eq!(r.root, 2.0);
        assert_eq!(calls, 3);
    }

    #[test]
    fn quadratic_root() {
        let r = shoot_scalar(&mut |v| Ok(v * v - 4.0), 1.0, 3.0, 1e-12, 50, None).unwrap();
        assert!((r.root - 2.0).abs() < 1e-12);
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn window_forces_bisection() {
        // secant from (0.5, 1.0) on atan jumps far outside [0, 4]
        let f = |v: f64| Ok((v - 3.0).atan());
        let r = shoot_scalar(&mut { f }, 0.5, 3.9, 1e-12, 200, Some((0.0, 4.0))).unwrap();
        assert!((r.root - 3.0).abs() < 1e-10);
    }

    #[test]
    fn failures() {
        assert!(shoot_scalar(&mut |v| Ok(v), 1.0, 1.0, 1e-12, 10, None).is_err());
        let err = shoot_scalar(&mut |v| Ok(v * v + 1.0), 1.0, 2.0, 1e-12, 20, None).unwrap_err();
        assert!(err.is_no_convergence());
        let err = shoot_scalar(
            &mut |v| if v > 1.5 { Err(Error::domain(v, &[], "bad")) } else { Ok(v) },
            1.0,
            2.0,
            1e-12,
            10,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shot { guess, .. } if guess == 2.0));
        assert!(err.is_domain_violation());
    }

    #[test]
    fn below_critical_load_stays_straight() {
        let r = solve_buckled_bar(
            LoadType::Dead,
            2.0,
            (0.1, 0.2),
            &ShootingOptions::default(),
            &ShotIntegrator::lvim_default(),
        )
        .unwrap();
        assert!(r.theta_prime_0.abs() < 1e-9);
        assert!(r.trajectory.states.iter().all(|s| s[0].abs() < 1e-9));
        assert_eq!(r.trajectory.states[0][0], 0.0);
    }
}
