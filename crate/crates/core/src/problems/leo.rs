//! Low Earth orbit in a body-fixed spherical-harmonic field (no rotation).

use std::f64::consts::PI;
use std::sync::Arc;

use super::gravity::{gravity_accel, gravity_potential, GravityModel};
use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::system::FnSystem;

/// `[x, y, z, ẋ, ẏ, ż]` in metres and metres per second.
pub const LEO_INITIAL_STATE: [f64; 6] = [-0.3889e6, 7.7388e6, 0.6736e6, -3.5794e3, 0.0, 6.1997e3];

fn position(x: &[f64]) -> [f64; 3] {
    [x[0], x[1], x[2]]
}

/// Keplerian period from the point-mass energy of `state`.
pub fn orbital_period(mu: f64, state: &[f64]) -> Result<f64> {
    let r = (state[0].powi(2) + state[1].powi(2) + state[2].powi(2)).sqrt();
    let v2 = state[3].powi(2) + state[4].powi(2) + state[5].powi(2);
    let energy = 0.5 * v2 - mu / r;
    if !(energy < 0.0) {
        return Err(Error::invalid("state is not on a bound orbit"));
    }
    let a = -mu / (2.0 * energy);
    Ok(2.0 * PI * (a * a * a / mu).sqrt())
}

/// Six-state orbit over one Keplerian period. The Jacobian's acceleration
/// block is the point-mass gravity gradient `μ(3 q̂ q̂ᵀ − I)/|q|³` whatever
/// the degree. The invariant is `½|q̇|² + U(q)`.
pub fn leo(model: &GravityModel) -> Result<ProblemSpec> {
    let accel_model = model.clone();
    let mu = model.mu;
    let sys = FnSystem::new(6, move |t, x, out| {
        let a = gravity_accel(&accel_model, &position(x)).map_err(|e| match e {
            Error::DomainViolation { reason, .. } => Error::domain(t, x, reason),
            other => other,
        })?;
        out[..3].copy_from_slice(&x[3..]);
        out[3..].copy_from_slice(&a);
        Ok(())
    })
    .with_jacobian(move |_, x, j| {
        j.fill(0.0);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let r = r2.sqrt();
        let k = mu / (r2 * r);
        for i in 0..3 {
            j[(i, i + 3)] = 1.0;
            for c in 0..3 {
                let delta = if i == c { 1.0 } else { 0.0 };
                j[(i + 3, c)] = k * (3.0 * x[i] * x[c] / r2 - delta);
            }
        }
        Ok(())
    });
    let tf = orbital_period(mu, &LEO_INITIAL_STATE)?;
    let energy_model = model.clone();
    let spec = ProblemSpec::new(
        "leo",
        Arc::new(sys),
        LEO_INITIAL_STATE.to_vec(),
        (0.0, tf),
        vec!["t", "x", "y", "z", "vx", "vy", "vz"],
        format!(
            "low Earth orbit, gravity degree {}, one Keplerian period ({tf:.3} s)",
            model.degree
        ),
    );
    Ok(spec.with_invariant(Arc::new(move |x| {
        let v2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
        Ok(0.5 * v2 + gravity_potential(&energy_model, &position(x))?)
    })))
}
