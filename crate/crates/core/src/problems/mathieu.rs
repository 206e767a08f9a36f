//! Mathieu equation `ẍ + (δ − ε cos t) x = 0`.

use std::sync::Arc;

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::system::FnSystem;

/// State `[x, ẋ]` from `[1, 0]` over `[0, 100]`.
pub fn mathieu(delta: f64, epsilon: f64) -> Result<ProblemSpec> {
    if !delta.is_finite() || !epsilon.is_finite() {
        return Err(Error::invalid("Mathieu parameters must be finite"));
    }
    let sys = FnSystem::new(2, move |t, x, out| {
        out[0] = x[1];
        out[1] = -(delta - epsilon * t.cos()) * x[0];
        Ok(())
    })
    .with_jacobian(move |t, _, j| {
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -(delta - epsilon * t.cos());
        j[(1, 1)] = 0.0;
        Ok(())
    });
    Ok(ProblemSpec::new(
        "mathieu",
        Arc::new(sys),
        vec![1.0, 0.0],
        (0.0, 100.0),
        vec!["t", "x", "x_dot"],
        format!("Mathieu equation, delta = {delta}, epsilon = {epsilon}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lvim::{march, SolverConfig};

    #[test]
    fn unforced_case_is_cosine() {
        let spec = mathieu(1.0, 0.0).unwrap();
        let cfg = SolverConfig::new(13, 0.5, 1e-12);
        let tr = march(spec.system.as_ref(), 0.0, 20.0, &spec.x0, &cfg).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s[0] - t.cos()).abs() < 1e-9, "t = {t}");
        }
    }
}
