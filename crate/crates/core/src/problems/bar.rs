//! Buckled cantilever `θ″ = −P · f(θ, α)` in arc length `s ∈ [0, 1]` with unit
//! bending stiffness, clamped at `s = 0` and free at `s = 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::system::FnSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadType {
    /// Vertical force of fixed direction: `f = sin θ`.
    Dead,
    /// Force normal to the tip: `f = cos(θ − α) sin θ`.
    PerpendicularFollower,
    /// Force along the tip tangent: `f = sin(θ − α) sin θ`.
    TangentFollower,
}

impl LoadType {
    pub const ALL: [LoadType; 3] = [
        LoadType::Dead,
        LoadType::PerpendicularFollower,
        LoadType::TangentFollower,
    ];

    /// Whether the tip angle `α` enters the equation.
    pub fn is_follower(self) -> bool {
        self != LoadType::Dead
    }
}

impl fmt::Display for LoadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadType::Dead => "dead",
            LoadType::PerpendicularFollower => "perpendicular",
            LoadType::TangentFollower => "tangent",
        })
    }
}

impl FromStr for LoadType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dead" => Ok(LoadType::Dead),
            "perpendicular" | "perpendicular-follower" => Ok(LoadType::PerpendicularFollower),
            "tangent" | "tangent-follower" => Ok(LoadType::TangentFollower),
            other => Err(Error::invalid(format!(
                "unknown load type {other:?} (expected dead, perpendicular or tangent)"
            ))),
        }
    }
}

/// State `[θ, θ′]` on `[0, 1]` from `[0, 0]`; the shooting solver replaces
/// the initial slope.
pub fn buckled_bar(load_type: LoadType, load: f64, alpha: f64) -> Result<ProblemSpec> {
    if !(load >= 0.0 && load.is_finite()) {
        return Err(Error::invalid(format!("load must be non-negative, got {load}")));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite"));
    }
    let p = load;
    let sys = FnSystem::new(2, move |_, x, out| {
        let th = x[0];
        out[0] = x[1];
        out[1] = -p * match load_type {
            LoadType::Dead => th.sin(),
            LoadType::PerpendicularFollower => (th - alpha).cos() * th.sin(),
            LoadType::TangentFollower => (th - alpha).sin() * th.sin(),
        };
        Ok(())
    })
    .with_jacobian(move |_, x, j| {
        let th = x[0];
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -p * match load_type {
            LoadType::Dead => th.cos(),
            LoadType::PerpendicularFollower => (2.0 * th - alpha).cos(),
            LoadType::TangentFollower => (2.0 * th - alpha).sin(),
        };
        j[(1, 1)] = 0.0;
        Ok(())
    });
    Ok(ProblemSpec::new(
        "buckled-bar",
        Arc::new(sys),
        vec![0.0, 0.0],
        (0.0, 1.0),
        vec!["s", "theta", "theta_prime"],
        format!("buckled bar, {load_type} load P = {load}, alpha = {alpha}"),
    ))
}
