//! Local variational iteration with Chebyshev collocation for nonlinear
//! ODEs, an adaptive Dormand-Prince reference integrator, and a set of
//! benchmark problems.

pub mod cheb;
pub mod compare;
pub mod error;
pub mod lvim;
pub mod problems;
pub mod rk;
pub mod shooting;
pub mod system;
pub mod trajectory;

pub use cheb::{cgl_nodes, CollocationGrid, OperatorSet};
pub use error::{Error, Result};
pub use problems::{ProblemSpec, DEFAULTS};
pub use lvim::{march, march_partial, march_until, JacobianMode, SegmentResult, SolverConfig};
pub use rk::{rk45_integrate, RkConfig};
pub use system::{FnSystem, OdeSystem};
pub use trajectory::Trajectory;
