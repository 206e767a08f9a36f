//! Undamped pendulum `θ̈ = −(g/l) sin θ`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{defaults_for, ProblemSpec};
use crate::error::{Error, Result};
use crate::lvim::march_until;
use crate::system::FnSystem;

/// Release angle of the large-amplitude benchmark, just short of inverted.
pub const PENDULUM_AMPLITUDE: f64 = 3.1329;

fn system(g_over_l: f64) -> FnSystem {
    FnSystem::new(2, move |_, x, out| {
        out[0] = x[1];
        out[1] = -g_over_l * x[0].sin();
        Ok(())
    })
    .with_jacobian(move |_, x, j| {
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -g_over_l * x[0].cos();
        j[(1, 1)] = 0.0;
        Ok(())
    })
}

/// State `[θ, θ̇]`, released from rest at [`PENDULUM_AMPLITUDE`] over `[0, 50]`.
/// The invariant is the energy `½θ̇² − (g/l) cos θ`.
pub fn pendulum(g_over_l: f64) -> Result<ProblemSpec> {
    pendulum_from(g_over_l, PENDULUM_AMPLITUDE)
}

pub(crate) fn pendulum_from(g_over_l: f64, amplitude: f64) -> Result<ProblemSpec> {
    if !(g_over_l > 0.0 && g_over_l.is_finite()) {
        return Err(Error::invalid(format!("g/l must be positive, got {g_over_l}")));
    }
    let spec = ProblemSpec::new(
        "pendulum",
        Arc::new(system(g_over_l)),
        vec![amplitude, 0.0],
        (0.0, 50.0),
        vec!["t", "theta", "theta_dot"],
        format!("pendulum, g/l = {g_over_l}, released from rest at theta = {amplitude}"),
    );
    Ok(spec.with_invariant(Arc::new(move |x| {
        Ok(0.5 * x[1] * x[1] - g_over_l * x[0].cos())
    })))
}

/// Angular frequency `2π / period` of the pendulum (`g/l = 1`) released
/// from rest at each amplitude.
///
/// The swing from `θ0` reaches `−θ0` after half a period, where `θ̇` returns
/// to zero from below. That crossing is located on the collocation
/// interpolant by bisection.
pub fn pendulum_frequency_sweep(amplitudes: &[f64]) -> Result<Vec<(f64, f64)>> {
    amplitudes.iter().map(|&a| Ok((a, pendulum_frequency(a)?))).collect()
}

fn pendulum_frequency(amplitude: f64) -> Result<f64> {
    if !(amplitude > 0.0 && amplitude < PI) {
        return Err(Error::invalid(format!(
            "amplitude must lie in (0, pi), got {amplitude}"
        )));
    }
    let spec = pendulum_from(1.0, amplitude)?;
    let config = defaults_for("pendulum")?.solver_config();
    let horizon = 1000.0;
    let mut crossing = None;
    let out = march_until(
        spec.system.as_ref(),
        0.0,
        horizon,
        &spec.x0,
        &config,
        &mut |times, nodes| {
            for j in 1..times.len() {
                let (prev, cur) = (nodes[(j - 1, 1)], nodes[(j, 1)]);
                if prev < 0.0 && cur >= 0.0 {
                    crossing = Some((times[j - 1], times[j]));
                    return true;
                }
            }
            false
        },
    )?;
    if let Some(e) = out.error {
        return Err(e);
    }
    let (mut lo, mut hi) = crossing.ok_or_else(|| {
        Error::invalid(format!("no half swing found within t = {horizon} for amplitude {amplitude}"))
    })?;
    let traj = out.trajectory;
    let rate = |t: f64| traj.state_at(t).map(|s| s[1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let half_period = 0.5 * (lo + hi);
    Ok(2.0 * PI / (2.0 * half_period))
}
