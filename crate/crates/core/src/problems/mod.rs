//! Benchmark problems with analytic Jacobians and their reference
//! configurations.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lvim::{JacobianMode, SolverConfig};
use crate::rk::RkConfig;
use crate::system::OdeSystem;

mod bar;
mod blasius;
mod elastica;
pub mod gravity;
mod leo;
mod mathieu;
mod pendulum;
mod stellar;

pub use bar::{buckled_bar, LoadType};
pub use blasius::{blasius_pair, Stage1Solver, BLASIUS_XI_MAX};
pub use elastica::{classify_elastica, elastica, elastica_slope, ElasticaRegime, ELASTICA_DEFAULT_CASES};
pub use gravity::{gravity_accel, gravity_potential, GravityModel};
pub use leo::{leo, orbital_period, LEO_INITIAL_STATE};
pub use mathieu::mathieu;
pub use pendulum::{pendulum, pendulum_frequency_sweep, PENDULUM_AMPLITUDE};
pub use stellar::{emden_chandrasekhar, white_dwarf};

/// A scalar that should stay constant along exact solutions.
pub type Invariant = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// Reference solver settings for one problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDefaults {
    pub problem: &'static str,
    pub n_basis: usize,
    pub dt: f64,
    pub tol: f64,
    pub jacobian_mode: JacobianMode,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl ProblemDefaults {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            jacobian_mode: self.jacobian_mode,
            ..SolverConfig::new(self.n_basis, self.dt, self.tol)
        }
    }

    pub fn rk_config(&self) -> RkConfig {
        RkConfig::with_tolerances(self.rel_tol, self.abs_tol)
    }
}

const fn row(problem: &'static str, n_basis: usize, dt: f64, tol: f64) -> ProblemDefaults {
    ProblemDefaults {
        problem,
        n_basis,
        dt,
        tol,
        jacobian_mode: JacobianMode::Full,
        rel_tol: 1e-12,
        abs_tol: 1e-15,
    }
}

/// The one table of default settings every factory and the CLI read from.
pub const DEFAULTS: [ProblemDefaults; 8] = [
    row("blasius", 5, 0.5, 1e-10),
    row("emden", 13, 1.0, 1e-10),
    row("white-dwarf", 5, 0.1, 1e-10),
    row("mathieu", 5, 0.5, 1e-10),
    row("pendulum", 5, 0.1, 1e-10),
    row("buckled-bar", 7, 0.1, 1e-10),
    row("elastica", 7, 0.12, 1e-10),
    ProblemDefaults {
        jacobian_mode: JacobianMode::Frozen,
        ..row("leo", 26, 500.0, 1e-8)
    },
];

pub const PROBLEM_NAMES: [&str; 8] = [
    "blasius",
    "emden",
    "white-dwarf",
    "mathieu",
    "pendulum",
    "buckled-bar",
    "elastica",
    "leo",
];

pub fn defaults_for(problem: &str) -> Result<ProblemDefaults> {
    DEFAULTS
        .iter()
        .find(|d| d.problem == problem)
        .copied()
        .ok_or_else(|| {
            Error::invalid(format!(
                "unknown problem {problem:?}; valid names: {}",
                PROBLEM_NAMES.join(", ")
            ))
        })
}

/// A ready-to-solve initial value problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub system: Arc<dyn OdeSystem>,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub tf: f64,
    pub lvim_defaults: SolverConfig,
    pub rk_defaults: RkConfig,
    /// Column names: independent variable first, then each state component.
    pub labels: Vec<&'static str>,
    pub notes: String,
    pub invariant: Option<Invariant>,
}

impl ProblemSpec {
    pub(crate) fn new(
        name: &'static str,
        system: Arc<dyn OdeSystem>,
        x0: Vec<f64>,
        span: (f64, f64),
        labels: Vec<&'static str>,
        notes: impl Into<String>,
    ) -> Self {
        let defaults = defaults_for(name).expect("factory names are in the defaults table");
        debug_assert_eq!(x0.len(), system.dim());
        debug_assert_eq!(labels.len(), system.dim() + 1);
        Self {
            name,
            system,
            x0,
            t0: span.0,
            tf: span.1,
            lvim_defaults: defaults.solver_config(),
            rk_defaults: defaults.rk_config(),
            labels,
            notes: notes.into(),
            invariant: None,
        }
    }

    pub(crate) fn with_invariant(mut self, f: Invariant) -> Self {
        self.invariant = Some(f);
        self
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .field("t0", &self.t0)
            .field("tf", &self.tf)
            .field("lvim_defaults", &self.lvim_defaults)
            .field("rk_defaults", &self.rk_defaults)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}
