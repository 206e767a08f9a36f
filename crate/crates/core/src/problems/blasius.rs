//! Blasius boundary layer `2f‴ + f f″ = 0`, `f(0) = f′(0) = 0`, `f′(∞) = 1`.
//!
//! The equation is invariant under `f(η) → λ f(λη)`, which turns the
//! boundary value problem into two initial value problems: integrate
//! `F″(0) = 1` once to read off `F′(∞)`, then rescale to
//! `f″(0) = F′(∞)^{−3/2}`.

use std::sync::Arc;

use super::{defaults_for, ProblemSpec};
use crate::error::{Error, Result};
use crate::lvim::{march, SolverConfig};
use crate::rk::{rk45_integrate, RkConfig};
use crate::system::FnSystem;

/// Truncation length standing in for infinity.
pub const BLASIUS_XI_MAX: f64 = 10.0;

/// Integrator for the unit-curvature stage.
#[derive(Debug, Clone, Copy)]
pub enum Stage1Solver {
    Lvim(SolverConfig),
    Rk(RkConfig),
}

impl Stage1Solver {
    pub fn lvim_default() -> Self {
        Stage1Solver::Lvim(defaults_for("blasius").expect("in table").solver_config())
    }

    pub fn rk_default() -> Self {
        Stage1Solver::Rk(defaults_for("blasius").expect("in table").rk_config())
    }
}

fn system() -> FnSystem {
    FnSystem::new(3, |_, x, out| {
        out[0] = x[1];
        out[1] = x[2];
        out[2] = -0.5 * x[0] * x[2];
        Ok(())
    })
    .with_jacobian(|_, x, j| {
        j.fill(0.0);
        j[(0, 1)] = 1.0;
        j[(1, 2)] = 1.0;
        j[(2, 0)] = -0.5 * x[2];
        j[(2, 2)] = -0.5 * x[0];
        Ok(())
    })
}

/// Returns `f″(0)` and the resulting initial value problem for `[f, f′, f″]`
/// on `[0, xi_max]`.
pub fn blasius_pair(xi_max: f64, stage1: Stage1Solver) -> Result<(f64, ProblemSpec)> {
    if !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(Error::invalid(format!("xi_max must be positive, got {xi_max}")));
    }
    let sys = system();
    let x0 = [0.0, 0.0, 1.0];
    let end = match stage1 {
        Stage1Solver::Lvim(cfg) => march(&sys, 0.0, xi_max, &x0, &cfg)?,
        Stage1Solver::Rk(cfg) => rk45_integrate(&sys, 0.0, xi_max, &x0, &cfg)?,
    };
    let slope = end.final_state()[1];
    if !(slope > 0.0) {
        return Err(Error::invalid(format!(
            "F'({xi_max}) = {slope} is not positive; truncation too short"
        )));
    }
    let f2 = slope.powf(-1.5);
    let spec = ProblemSpec::new(
        "blasius",
        Arc::new(sys),
        vec![0.0, 0.0, f2],
        (0.0, xi_max),
        vec!["eta", "f", "f_prime", "f_double_prime"],
        format!("Blasius profile, f''(0) = {f2:.12} from truncation at {xi_max}"),
    );
    Ok((f2, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_curvature_matches_known_value() {
        let (f2, spec) = blasius_pair(BLASIUS_XI_MAX, Stage1Solver::rk_default()).unwrap();
        // classical value for 2f''' + f f'' = 0
        assert!((f2 - 0.332057336).abs() < 1e-8, "{f2}");
        assert_eq!(spec.x0[..2], [0.0, 0.0]);
        assert!(blasius_pair(0.0, Stage1Solver::rk_default()).is_err());
    }
}
