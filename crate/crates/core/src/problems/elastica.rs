//! Euler's elastica as the quadrature
//! `dy/dx = (a² − c² + x²) / √((c² − x²)(2a² − c² + x²))`, `y(0) = 0`.

use std::sync::Arc;

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::system::FnSystem;

/// Squared ratio `c/a` separating the middle and upper families.
const MIDDLE_UPPER_RATIO_SQ: f64 = 1.651868;

/// One `(a, c)` pair inside each family.
pub const ELASTICA_DEFAULT_CASES: [(f64, f64); 3] = [(1.0, 0.5), (1.0, 1.2), (1.0, 1.35)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElasticaRegime {
    /// `0 < c < a`
    Lower,
    /// `a < c < a √1.651868`
    Middle,
    /// `a √1.651868 < c < a √2`
    Upper,
    /// `c` exactly on one of the family boundaries.
    Boundary,
}

impl ElasticaRegime {
    pub fn label(self) -> &'static str {
        match self {
            ElasticaRegime::Lower => "lower",
            ElasticaRegime::Middle => "middle",
            ElasticaRegime::Upper => "upper",
            ElasticaRegime::Boundary => "boundary",
        }
    }
}

pub fn classify_elastica(a: f64, c: f64) -> Result<ElasticaRegime> {
    if !(a > 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
        return Err(Error::invalid(format!("need a > 0 and c > 0, got a = {a}, c = {c}")));
    }
    let mid = a * MIDDLE_UPPER_RATIO_SQ.sqrt();
    let top = a * 2f64.sqrt();
    Ok(if c < a {
        ElasticaRegime::Lower
    } else if c > a && c < mid {
        ElasticaRegime::Middle
    } else if c > mid && c < top {
        ElasticaRegime::Upper
    } else if c == a || c == mid {
        ElasticaRegime::Boundary
    } else {
        return Err(Error::invalid(format!(
            "c = {c} must be below a sqrt(2) = {top} for a real slope at x = 0"
        )));
    })
}

/// Slope at `x`, or a domain violation outside `|x| < c` or where the second
/// factor is not positive.
pub fn elastica_slope(a: f64, c: f64, x: f64) -> Result<f64> {
    let outer = c * c - x * x;
    let inner = 2.0 * a * a - c * c + x * x;
    if !(outer > 0.0) {
        return Err(Error::domain(x, &[], format!("|x| must be below c = {c}")));
    }
    if !(inner > 0.0) {
        return Err(Error::domain(x, &[], "2a^2 - c^2 + x^2 must be positive"));
    }
    Ok((a * a - c * c + x * x) / (outer * inner).sqrt())
}

/// State `[y]` on `[0, c (1 − x_margin)]`.
pub fn elastica(a: f64, c: f64, x_margin: f64) -> Result<ProblemSpec> {
    let regime = classify_elastica(a, c)?;
    if !(x_margin > 0.0 && x_margin < 1.0) {
        return Err(Error::invalid(format!("x_margin must lie in (0, 1), got {x_margin}")));
    }
    let sys = FnSystem::new(1, move |x, y, out| {
        out[0] = elastica_slope(a, c, x).map_err(|e| match e {
            Error::DomainViolation { t, reason, .. } => Error::domain(t, y, reason),
            other => other,
        })?;
        Ok(())
    })
    .with_jacobian(|_, _, j| {
        j[(0, 0)] = 0.0;
        Ok(())
    });
    Ok(ProblemSpec::new(
        "elastica",
        Arc::new(sys),
        vec![0.0],
        (0.0, c * (1.0 - x_margin)),
        vec!["x", "y"],
        format!("elastica, a = {a}, c = {c} ({} family)", regime.label()),
    ))
}
