//! Running a problem with both integrators and measuring their agreement.

use crate::error::{Error, Result};
use crate::lvim::{march_partial, SolverConfig};
use crate::problems::{Invariant, ProblemSpec};
use crate::rk::{rk45_partial, RkConfig};
use crate::system::OdeSystem;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone)]
pub struct Comparison {
    pub lvim: Trajectory,
    pub oracle: Trajectory,
    /// Per component, the largest `|LVIM − oracle|` over the LVIM samples
    /// inside the oracle's span.
    pub max_discrepancy: Vec<f64>,
    /// Domain violation that ended the LVIM run early, if any.
    pub lvim_stop: Option<Error>,
    /// Domain violation that ended the oracle run early, if any.
    pub oracle_stop: Option<Error>,
}

/// Keeps a partial result only when it ended at a domain boundary.
fn only_domain_stop(error: Option<Error>, traj: &Trajectory) -> Result<Option<Error>> {
    match error {
        None => Ok(None),
        Some(e) if e.is_domain_violation() && traj.len() > 1 => Ok(Some(e)),
        Some(e) => Err(e),
    }
}

/// Solves with LVIM and with the Dormand-Prince oracle. When
/// `follow_domain` is set, either run may end early at a domain violation
/// and the comparison covers the shorter span.
#[allow(clippy::too_many_arguments)]
pub fn compare_solvers(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    lvim_cfg: &SolverConfig,
    rk_cfg: &RkConfig,
    follow_domain: bool,
) -> Result<Comparison> {
    let lv = march_partial(system, t0, tf, x0, lvim_cfg)?;
    let rk = rk45_partial(system, t0, tf, x0, rk_cfg)?;
    let (lvim_stop, oracle_stop) = if follow_domain {
        (
            only_domain_stop(lv.error, &lv.trajectory)?,
            only_domain_stop(rk.error, &rk.trajectory)?,
        )
    } else {
        if let Some(e) = lv.error.or(rk.error) {
            return Err(e);
        }
        (None, None)
    };
    let max_discrepancy = max_discrepancy(&lv.trajectory, &rk.trajectory)?;
    Ok(Comparison {
        lvim: lv.trajectory,
        oracle: rk.trajectory,
        max_discrepancy,
        lvim_stop,
        oracle_stop,
    })
}

/// [`compare_solvers`] at a problem's own span and initial state.
pub fn compare_problem(
    spec: &ProblemSpec,
    lvim_cfg: &SolverConfig,
    rk_cfg: &RkConfig,
) -> Result<Comparison> {
    compare_solvers(
        spec.system.as_ref(),
        spec.t0,
        spec.tf,
        &spec.x0,
        lvim_cfg,
        rk_cfg,
        spec.name == "white-dwarf",
    )
}

/// Per component max `|a − b|` over the samples of `a` that lie inside `b`'s span.
pub fn max_discrepancy(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    let mut worst = vec![0.0_f64; a.dim()];
    for (t, s) in a.times.iter().zip(&a.states) {
        if *t < b.t_start() || *t > b.t_end() {
            continue;
        }
        let r = b.state_at(*t)?;
        for (w, (x, y)) in worst.iter_mut().zip(s.iter().zip(&r)) {
            *w = w.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Largest `|I(x(t)) − I(x(t0))| / |I(x(t0))|` over the samples.
pub fn invariant_drift(invariant: &Invariant, traj: &Trajectory) -> Result<f64> {
    let e0 = invariant(&traj.states[0])?;
    let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
    let mut worst = 0.0_f64;
    for s in &traj.states {
        worst = worst.max((invariant(s)? - e0).abs() / scale);
    }
    Ok(worst)
}

/// Largest `|x_k|` over samples with `t` in `[lo, hi]`.
pub fn window_peak(traj: &Trajectory, component: usize, lo: f64, hi: f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| (lo..=hi).contains(*t))
        .map(|(_, s)| s[component].abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::FnSystem;
    use nalgebra::DMatrix;

    #[test]
    fn exponential_agrees() {
        let sys = FnSystem::linear(DMatrix::identity(1, 1));
        let c = compare_solvers(
            &sys,
            0.0,
            2.0,
            &[1.0],
            &SolverConfig::new(13, 0.5, 1e-13),
            &RkConfig::default(),
            false,
        )
        .unwrap();
        assert!(c.max_discrepancy[0] < 1e-10);
        assert!(c.lvim_stop.is_none() && c.oracle_stop.is_none());
    }
}
