//! Isothermal gas sphere (Emden-Chandrasekhar) and white dwarf structure
//! equations. Both have a `2/ξ` term, so integration starts a small offset
//! from the centre using the leading terms of the series solution.

use std::sync::Arc;

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::system::FnSystem;

/// `ψ″ = e^{−ψ} − (2/ξ) ψ′`, state `[ψ, ψ′]` on `[xi_start, 8]`, starting
/// from `ψ ≈ ξ²/6 − ξ⁴/120`.
pub fn emden_chandrasekhar(xi_start: f64) -> Result<ProblemSpec> {
    if !(xi_start > 0.0 && xi_start < 1.0) {
        return Err(Error::invalid(format!(
            "xi_start must lie in (0, 1), got {xi_start}"
        )));
    }
    let sys = FnSystem::new(2, |xi, x, out| {
        out[0] = x[1];
        out[1] = (-x[0]).exp() - 2.0 / xi * x[1];
        Ok(())
    })
    .with_jacobian(|xi, x, j| {
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -(-x[0]).exp();
        j[(1, 1)] = -2.0 / xi;
        Ok(())
    });
    let xi = xi_start;
    let x0 = vec![
        xi * xi / 6.0 - xi.powi(4) / 120.0,
        xi / 3.0 - xi.powi(3) / 30.0,
    ];
    Ok(ProblemSpec::new(
        "emden",
        Arc::new(sys),
        x0,
        (xi_start, 8.0),
        vec!["xi", "psi", "psi_prime"],
        format!("isothermal sphere, series start at xi = {xi_start}"),
    ))
}

/// `φ″ = −(φ² − C)^{3/2} − (2/η) φ′`, state `[φ, φ′]` from `eta_start`.
///
/// The solution reaches `φ² = C` at finite radius; past that point the
/// right-hand side reports a domain violation. The default span `[eta_start, 5]`
/// runs beyond the boundary for all `C` of interest, so callers follow the
/// solution up to the violation.
pub fn white_dwarf(c_param: f64, eta_start: f64) -> Result<ProblemSpec> {
    if !(0.0..=1.0).contains(&c_param) {
        return Err(Error::invalid(format!("C must lie in [0, 1], got {c_param}")));
    }
    if !(eta_start > 0.0 && eta_start < 1.0) {
        return Err(Error::invalid(format!(
            "eta_start must lie in (0, 1), got {eta_start}"
        )));
    }
    let c = c_param;
    let sys = FnSystem::new(2, move |eta, x, out| {
        let radicand = x[0] * x[0] - c;
        if radicand < 0.0 {
            return Err(Error::domain(eta, x, format!("phi^2 < C = {c}")));
        }
        out[0] = x[1];
        out[1] = -radicand.powf(1.5) - 2.0 / eta * x[1];
        Ok(())
    })
    .with_jacobian(move |eta, x, j| {
        let radicand = x[0] * x[0] - c;
        if radicand < 0.0 {
            return Err(Error::domain(eta, x, format!("phi^2 < C = {c}")));
        }
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -3.0 * x[0] * radicand.sqrt();
        j[(1, 1)] = -2.0 / eta;
        Ok(())
    });
    let a = (1.0 - c).powf(1.5) / 6.0;
    let x0 = vec![1.0 - a * eta_start * eta_start, -2.0 * a * eta_start];
    Ok(ProblemSpec::new(
        "white-dwarf",
        Arc::new(sys),
        x0,
        (eta_start, 5.0),
        vec!["eta", "phi", "phi_prime"],
        format!("white dwarf, C = {c}, series start at eta = {eta_start}; integrated up to phi^2 = C"),
    ))
}
