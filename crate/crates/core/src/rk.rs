//! Adaptive Dormand-Prince 5(4) integrator with dense output, used as the
//! reference solution for every comparison.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::system::{checked_rhs, OdeSystem};
use crate::trajectory::{Piece, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for RkConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl RkConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        if !(self.h_max > 0.0) {
            return Err(Error::invalid("h_max must be positive"));
        }
        if let Some(h) = self.h_init {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("h_init must be positive"));
            }
        }
        Ok(())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Outcome of an integration that may end early at a domain boundary.
#[derive(Debug, Clone)]
pub struct RkOutcome {
    pub trajectory: Trajectory,
    pub error: Option<Error>,
}

/// Integrates `[t0, tf]`, failing on any error.
pub fn rk45_integrate(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    cfg: &RkConfig,
) -> Result<Trajectory> {
    let out = rk45_partial(system, t0, tf, x0, cfg)?;
    match out.error {
        Some(e) => Err(e),
        None => Ok(out.trajectory),
    }
}

/// Integrates `[t0, tf]`; when the system leaves its domain the step is
/// shrunk until it can no longer advance, and the accepted part is returned
/// together with the error.
pub fn rk45_partial(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    cfg: &RkConfig,
) -> Result<RkOutcome> {
    cfg.validate()?;
    let d = system.dim();
    if x0.len() != d {
        return Err(Error::invalid(format!(
            "initial state has {} components, system has {d}",
            x0.len()
        )));
    }
    if !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
        return Err(Error::invalid(format!("need t0 < tf, got [{t0}, {tf}]")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(t0, x0, "initial state is not finite"));
    }

    let started = Instant::now();
    let mut traj = Trajectory::default();
    traj.push_sample(t0, x0.to_vec());

    let mut t = t0;
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; d];
    checked_rhs(system, t, &x, &mut k1)?;
    let mut evals: u64 = 1;

    let mut h = match cfg.h_init {
        Some(h) => h,
        None => {
            evals += 1;
            initial_step(system, t, &x, &k1, cfg)?
        }
    }
    .min(cfg.h_max)
    .min(tf - t0);

    let mut k = vec![vec![0.0; d]; 6];
    let mut stage = vec![0.0; d];
    let mut x_new = vec![0.0; d];
    let mut err_vec = vec![0.0; d];
    let mut rejected_last = false;
    let mut outcome_error = None;

    loop {
        if traj.accepted_steps + traj.rejected_steps >= cfg.max_steps {
            outcome_error = Some(Error::NoConvergence {
                iterations: cfg.max_steps,
                last_correction: h,
                hint: format!("step limit reached at t = {t}; loosen tolerances or raise max_steps"),
            });
            break;
        }
        let last = t + h >= tf;
        if last {
            h = tf - t;
        }
        let t_new = if last { tf } else { t + h };

        let step = trial_step(system, t, h, &x, &k1, &mut k, &mut stage, &mut x_new, &mut err_vec, &mut evals);
        match step {
            Ok(()) => {}
            Err(e) if e.is_domain_violation() => {
                traj.rejected_steps += 1;
                rejected_last = true;
                h *= 0.25;
                if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                    outcome_error = Some(e);
                    break;
                }
                continue;
            }
            Err(e) => return Err(e),
        }

        let err = (0..d)
            .map(|i| {
                let sc = cfg.abs_tol + cfg.rel_tol * x[i].abs().max(x_new[i].abs());
                (err_vec[i] / sc).abs()
            })
            .fold(0.0, f64::max);

        if err <= 1.0 {
            let ydiff: Vec<f64> = (0..d).map(|i| x_new[i] - x[i]).collect();
            let r3: Vec<f64> = (0..d).map(|i| h * k1[i] - ydiff[i]).collect();
            let r4: Vec<f64> = (0..d).map(|i| ydiff[i] - h * k[5][i] - r3[i]).collect();
            let r5: Vec<f64> = (0..d)
                .map(|i| {
                    h * (D1 * k1[i]
                        + D3 * k[1][i]
                        + D4 * k[2][i]
                        + D5 * k[3][i]
                        + D6 * k[4][i]
                        + D7 * k[5][i])
                })
                .collect();
            traj.pieces.push(Piece::Dopri {
                t0: t,
                h,
                rcont: [x.clone(), ydiff, r3, r4, r5],
            });
            t = t_new;
            x.copy_from_slice(&x_new);
            k1.copy_from_slice(&k[5]);
            traj.push_sample(t, x.clone());
            traj.accepted_steps += 1;
            if last {
                break;
            }
            let mut fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h = (h * fac).min(cfg.h_max);
        } else {
            traj.rejected_steps += 1;
            rejected_last = true;
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            outcome_error = Some(Error::NoConvergence {
                iterations: traj.accepted_steps + traj.rejected_steps,
                last_correction: h,
                hint: format!("step size underflow at t = {t}"),
            });
            break;
        }
    }

    traj.total_rhs_evals = evals;
    traj.wall_time = started.elapsed().as_secs_f64();
    Ok(RkOutcome {
        trajectory: traj,
        error: outcome_error,
    })
}

/// Stages 2..7 of one step; `k[5]` holds the derivative at the new point.
#[allow(clippy::too_many_arguments)]
fn trial_step(
    system: &dyn OdeSystem,
    t: f64,
    h: f64,
    x: &[f64],
    k1: &[f64],
    k: &mut [Vec<f64>],
    stage: &mut [f64],
    x_new: &mut [f64],
    err: &mut [f64],
    evals: &mut u64,
) -> Result<()> {
    let d = x.len();
    let mut eval = |tt: f64, s: &[f64], out: &mut [f64]| {
        *evals += 1;
        checked_rhs(system, tt, s, out)
    };
    for i in 0..d {
        stage[i] = x[i] + h * A21 * k1[i];
    }
    eval(t + C2 * h, stage, &mut k[0])?;
    for i in 0..d {
        stage[i] = x[i] + h * (A31 * k1[i] + A32 * k[0][i]);
    }
    eval(t + C3 * h, stage, &mut k[1])?;
    for i in 0..d {
        stage[i] = x[i] + h * (A41 * k1[i] + A42 * k[0][i] + A43 * k[1][i]);
    }
    eval(t + C4 * h, stage, &mut k[2])?;
    for i in 0..d {
        stage[i] = x[i] + h * (A51 * k1[i] + A52 * k[0][i] + A53 * k[1][i] + A54 * k[2][i]);
    }
    eval(t + C5 * h, stage, &mut k[3])?;
    for i in 0..d {
        stage[i] = x[i]
            + h * (A61 * k1[i] + A62 * k[0][i] + A63 * k[1][i] + A64 * k[2][i] + A65 * k[3][i]);
    }
    eval(t + h, stage, &mut k[4])?;
    for i in 0..d {
        x_new[i] = x[i]
            + h * (A71 * k1[i] + A73 * k[1][i] + A74 * k[2][i] + A75 * k[3][i] + A76 * k[4][i]);
    }
    eval(t + h, x_new, &mut k[5])?;
    for i in 0..d {
        err[i] = h
            * (E1 * k1[i]
                + E3 * k[1][i]
                + E4 * k[2][i]
                + E5 * k[3][i]
                + E6 * k[4][i]
                + E7 * k[5][i]);
    }
    Ok(())
}

/// Starting step from the local derivative scale (one extra evaluation).
fn initial_step(
    system: &dyn OdeSystem,
    t: f64,
    x: &[f64],
    f0: &[f64],
    cfg: &RkConfig,
) -> Result<f64> {
    let d = x.len();
    let scale: Vec<f64> = x.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / d as f64).sqrt()
    };
    let d0 = rms(x);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let x1: Vec<f64> = (0..d).map(|i| x[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; d];
    checked_rhs(system, t + h0, &x1, &mut f1)?;
    let diff: Vec<f64> = (0..d).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms(&diff) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

/// States of `traj` at `times` via its continuous extension.
pub fn sample_at(traj: &Trajectory, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    traj.sample_at(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{CountingSystem, FnSystem};
    use nalgebra::DMatrix;

    #[test]
    fn exponential_growth() {
        let sys = FnSystem::linear(DMatrix::identity(1, 1));
        let tr = rk45_integrate(&sys, 0.0, 1.0, &[1.0], &RkConfig::default()).unwrap();
        assert!((tr.final_state()[0] - 1f64.exp()).abs() < 1e-11);
        assert_eq!(tr.t_end(), 1.0);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let sys = FnSystem::linear(a);
        let tf = 2.0 * std::f64::consts::PI;
        let tr = rk45_integrate(&sys, 0.0, tf, &[1.0, 0.0], &RkConfig::default()).unwrap();
        assert!((tr.final_state()[0] - 1.0).abs() < 1e-9);
        assert!(tr.final_state()[1].abs() < 1e-9);
    }

    #[test]
    fn evaluation_count_matches_calls() {
        let sys = CountingSystem::new(FnSystem::new(2, |_, x, out| {
            out[0] = x[1];
            out[1] = -x[0].sin();
            Ok(())
        }));
        let tr = rk45_integrate(&sys, 0.0, 10.0, &[2.0, 0.0], &RkConfig::default()).unwrap();
        assert_eq!(tr.total_rhs_evals, sys.rhs_calls());
        let trials = (tr.accepted_steps + tr.rejected_steps) as u64;
        assert_eq!(tr.total_rhs_evals, 2 + 6 * trials);
    }

    #[test]
    fn dense_output_is_exact_at_steps_and_accurate_between() {
        let sys = FnSystem::linear(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let tr = rk45_integrate(&sys, 0.0, 5.0, &[1.0, 0.0], &RkConfig::with_tolerances(1e-10, 1e-12))
            .unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert_eq!(&tr.state_at(*t).unwrap(), s);
        }
        for i in 0..100 {
            let t = 0.05 * i as f64 + 0.013;
            let s = sample_at(&tr, &[t]).unwrap();
            assert!((s[0][0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((s[0][1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
        assert!(matches!(tr.state_at(5.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn constant_rate_is_sampled_exactly() {
        let sys = FnSystem::new(1, |_, _, out| {
            out[0] = 1.0;
            Ok(())
        });
        let tr = rk45_integrate(&sys, 1.0, 4.0, &[2.0], &RkConfig::default()).unwrap();
        for t in [1.0, 1.3, 2.71, 4.0] {
            assert!((tr.state_at(t).unwrap()[0] - (2.0 + t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_exit_returns_partial_solution() {
        // x' = -1/(2x) from x = 1 reaches 0 at t = 1
        let sys = FnSystem::new(1, |t, x, out| {
            if x[0] <= 0.0 {
                return Err(Error::domain(t, x, "x must stay positive"));
            }
            out[0] = -0.5 / x[0];
            Ok(())
        });
        let out = rk45_partial(&sys, 0.0, 2.0, &[1.0], &RkConfig::with_tolerances(1e-10, 1e-12))
            .unwrap();
        assert!(out.error.unwrap().is_domain_violation());
        let end = out.trajectory.t_end();
        assert!((end - 1.0).abs() < 1e-3, "{end}");
    }

    #[test]
    fn step_cap_is_reported() {
        let sys = FnSystem::linear(DMatrix::identity(1, 1));
        let cfg = RkConfig {
            max_steps: 3,
            ..RkConfig::default()
        };
        let err = rk45_integrate(&sys, 0.0, 10.0, &[1.0], &cfg).unwrap_err();
        assert!(err.is_no_convergence());
    }
}
