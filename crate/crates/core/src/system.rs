//! First-order ODE systems `ẋ = g(t, x)` with Jacobians.

use nalgebra::DMatrix;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// A first-order system of dimension `dim()`.
///
/// Implementations must be pure: the same `(t, x)` always yields the same
/// output. Errors are reserved for points outside the model's domain.
pub trait OdeSystem: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `g(t, x)` into `out`.
    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Writes `∂g/∂x` at `(t, x)` into `jac` (`dim × dim`). The default is a
    /// central difference with step `1e-6 (1 + |x_i|)`.
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut DMatrix<f64>) -> Result<()> {
        finite_difference_jacobian(self, t, x, jac)
    }
}

pub fn finite_difference_jacobian<S: OdeSystem + ?Sized>(
    system: &S,
    t: f64,
    x: &[f64],
    jac: &mut DMatrix<f64>,
) -> Result<()> {
    let d = system.dim();
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; d];
    let mut fm = vec![0.0; d];
    for i in 0..d {
        let h = 1e-6 * (1.0 + x[i].abs());
        xp[i] = x[i] + h;
        system.rhs(t, &xp, &mut fp)?;
        xp[i] = x[i] - h;
        system.rhs(t, &xp, &mut fm)?;
        xp[i] = x[i];
        for r in 0..d {
            jac[(r, i)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(())
}

/// Evaluates `rhs` and rejects non-finite output as a domain violation.
pub fn checked_rhs<S: OdeSystem + ?Sized>(
    system: &S,
    t: f64,
    x: &[f64],
    out: &mut [f64],
) -> Result<()> {
    system.rhs(t, x, out)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(t, x, "right-hand side is not finite"));
    }
    Ok(())
}

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync;
type JacFn = dyn Fn(f64, &[f64], &mut DMatrix<f64>) -> Result<()> + Send + Sync;

/// A system assembled from closures. Without a Jacobian closure the finite
/// difference fallback is used.
pub struct FnSystem {
    dim: usize,
    rhs: Box<RhsFn>,
    jac: Option<Box<JacFn>>,
}

impl FnSystem {
    pub fn new(
        dim: usize,
        rhs: impl Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            rhs: Box::new(rhs),
            jac: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(f64, &[f64], &mut DMatrix<f64>) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }

    /// Constant-coefficient linear system `ẋ = A x`.
    pub fn linear(a: DMatrix<f64>) -> Self {
        assert!(a.is_square(), "linear system needs a square matrix");
        let d = a.nrows();
        let a_rhs = a.clone();
        Self::new(d, move |_, x, out| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = (0..d).map(|c| a_rhs[(r, c)] * x[c]).sum();
            }
            Ok(())
        })
        .with_jacobian(move |_, _, jac| {
            jac.copy_from(&a);
            Ok(())
        })
    }
}

impl OdeSystem for FnSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.rhs)(t, x, out)
    }

    fn jacobian(&self, t: f64, x: &[f64], jac: &mut DMatrix<f64>) -> Result<()> {
        match &self.jac {
            Some(f) => f(t, x, jac),
            None => finite_difference_jacobian(self, t, x, jac),
        }
    }
}

/// Wraps a system and counts `rhs` and `jacobian` calls.
pub struct CountingSystem<S> {
    inner: S,
    rhs_calls: AtomicU64,
    jac_calls: AtomicU64,
}

impl<S: OdeSystem> CountingSystem<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            rhs_calls: AtomicU64::new(0),
            jac_calls: AtomicU64::new(0),
        }
    }

    pub fn rhs_calls(&self) -> u64 {
        self.rhs_calls.load(Ordering::Relaxed)
    }

    pub fn jac_calls(&self) -> u64 {
        self.jac_calls.load(Ordering::Relaxed)
    }
}

impl<S: OdeSystem> OdeSystem for CountingSystem<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.rhs_calls.fetch_add(1, Ordering::Relaxed);
        self.inner.rhs(t, x, out)
    }

    fn jacobian(&self, t: f64, x: &[f64], jac: &mut DMatrix<f64>) -> Result<()> {
        self.jac_calls.fetch_add(1, Ordering::Relaxed);
        self.inner.jacobian(t, x, jac)
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for std::sync::Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).rhs(t, x, out)
    }

    fn jacobian(&self, t: f64, x: &[f64], jac: &mut DMatrix<f64>) -> Result<()> {
        (**self).jacobian(t, x, jac)
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).rhs(t, x, out)
    }

    fn jacobian(&self, t: f64, x: &[f64], jac: &mut DMatrix<f64>) -> Result<()> {
        (**self).jacobian(t, x, jac)
    }
}

/// `‖J − J_fd‖∞ / (1 + ‖J‖∞)` at one point, with `‖·‖∞` the max row sum.
pub fn jacobian_mismatch<S: OdeSystem + ?Sized>(system: &S, t: f64, x: &[f64]) -> Result<f64> {
    let d = system.dim();
    let mut analytic = DMatrix::zeros(d, d);
    let mut numeric = DMatrix::zeros(d, d);
    system.jacobian(t, x, &mut analytic)?;
    finite_difference_jacobian(system, t, x, &mut numeric)?;
    let row_sum = |m: &DMatrix<f64>| {
        (0..d)
            .map(|r| m.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Ok(row_sum(&(&analytic - &numeric)) / (1.0 + row_sum(&analytic)))
}
