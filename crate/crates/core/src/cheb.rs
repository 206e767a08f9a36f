//! Chebyshev-Gauss-Lobatto collocation grids and the node-space operators
//! used by the iteration engine.
//!
//! Every operator acts on an `M`-vector of node samples of one state
//! component. With `M = N` nodes and `N` Chebyshev basis functions the
//! basis matrix `Φ[j][k] = T_k(τ_j)` is square and the node space is exactly
//! the space of polynomials of degree `≤ N − 1`, so
//!
//! * `Q = Φ' Φ⁻¹` differentiates,
//! * `P = (∫Φ) Φ⁻¹` integrates from the first node,
//! * `H = P T − T P` (with `T = diag(t_j)`) is the commutator that carries the
//!   time weighting of the correction functional.
//!
//! The inverse is never formed; both operators come out of one LU
//! factorisation of `Φᵀ` with multiple right-hand sides.

use nalgebra::{DMatrix, DVector, LU};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `m` Chebyshev-Gauss-Lobatto nodes on `[-1, 1]`, ascending.
///
/// Evaluated as `sin(π (2j − m + 1) / (2(m − 1)))`, which equals
/// `−cos(π j / (m − 1))` but is exactly antisymmetric about the midpoint and
/// returns an exact `0` there for odd `m`.
pub fn cgl_nodes(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::invalid(format!("CGL grid needs at least 2 nodes, got {m}")));
    }
    let denom = 2.0 * (m - 1) as f64;
    Ok((0..m)
        .map(|j| {
            let k = 2 * j as i64 - (m as i64 - 1);
            (PI * k as f64 / denom).sin()
        })
        .collect())
}

/// Node set of one time segment together with its physical time mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    n_basis: usize,
    nodes: Vec<f64>,
    t_start: f64,
    t_len: f64,
    physical_nodes: Vec<f64>,
}

impl CollocationGrid {
    pub fn new(n_basis: usize, t_start: f64, t_len: f64) -> Result<Self> {
        if !(t_len > 0.0 && t_len.is_finite()) {
            return Err(Error::invalid(format!("segment length must be positive, got {t_len}")));
        }
        if !t_start.is_finite() {
            return Err(Error::invalid("segment start must be finite"));
        }
        let nodes = cgl_nodes(n_basis)?;
        let physical_nodes = nodes
            .iter()
            .map(|&tau| t_start + t_len * (tau + 1.0) / 2.0)
            .collect();
        Ok(Self {
            n_basis,
            nodes,
            t_start,
            t_len,
            physical_nodes,
        })
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    /// Number of nodes `M` (always equal to `N`).
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_len(&self) -> f64 {
        self.t_len
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.t_len
    }

    pub fn physical_nodes(&self) -> &[f64] {
        &self.physical_nodes
    }

    /// Same node layout moved to a different start time.
    pub fn shifted(&self, t_start: f64) -> Self {
        let physical_nodes = self
            .nodes
            .iter()
            .map(|&tau| t_start + self.t_len * (tau + 1.0) / 2.0)
            .collect();
        Self {
            t_start,
            physical_nodes,
            ..self.clone()
        }
    }

    /// Maps a physical time inside the segment to `[-1, 1]`.
    pub fn reference_time(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.t_start, self.t_end());
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        Ok((2.0 * (t - lo) / self.t_len - 1.0).clamp(-1.0, 1.0))
    }
}

/// Basis, derivative and running-integral matrices in the reference domain.
#[derive(Debug, Clone)]
pub struct BasisMatrices {
    /// `phi[(j, k)] = T_k(τ_j)`
    pub phi: DMatrix<f64>,
    /// `dphi[(j, k)] = T'_k(τ_j)`
    pub dphi: DMatrix<f64>,
    /// `iphi[(j, k)] = ∫_{-1}^{τ_j} T_k(s) ds`
    pub iphi: DMatrix<f64>,
}

/// `T_0(τ) ..= T_{n-1}(τ)` by the three-term recurrence.
fn chebyshev_t(tau: f64, n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n.max(2)];
    t[0] = 1.0;
    t[1] = tau;
    for k in 2..n {
        t[k] = 2.0 * tau * t[k - 1] - t[k - 2];
    }
    t.truncate(n);
    t
}

/// `T'_k(τ) = k U_{k-1}(τ)` for `k < n`. The `U` recurrence is polynomial,
/// so the endpoint values `T'_k(±1) = (±1)^{k+1} k²` come out exactly.
fn chebyshev_dt(tau: f64, n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n.max(2)];
    u[0] = 1.0;
    u[1] = 2.0 * tau;
    for k in 2..n {
        u[k] = 2.0 * tau * u[k - 1] - u[k - 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n {
        d[k] = k as f64 * u[k - 1];
    }
    d
}

/// Antiderivative of `T_k` (not anchored).
fn chebyshev_antiderivative(k: usize, t: &[f64], tau: f64) -> f64 {
    match k {
        0 => tau,
        1 => 0.5 * tau * tau,
        _ => {
            let kf = k as f64;
            0.5 * (t[k + 1] / (kf + 1.0) - t[k - 1] / (kf - 1.0))
        }
    }
}

pub fn basis_matrices(grid: &CollocationGrid) -> BasisMatrices {
    let n = grid.n_basis();
    let m = grid.n_nodes();
    let mut phi = DMatrix::zeros(m, n);
    let mut dphi = DMatrix::zeros(m, n);
    let mut iphi = DMatrix::zeros(m, n);
    let t_left = chebyshev_t(-1.0, n + 1);
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let t = chebyshev_t(tau, n + 1);
        let dt = chebyshev_dt(tau, n);
        for k in 0..n {
            phi[(j, k)] = t[k];
            dphi[(j, k)] = dt[k];
            iphi[(j, k)] = chebyshev_antiderivative(k, &t, tau)
                - chebyshev_antiderivative(k, &t_left, -1.0);
        }
    }
    BasisMatrices { phi, dphi, iphi }
}

/// `P T − T P` for `T = diag(times)`.
pub fn commutator(p: &DMatrix<f64>, times: &[f64]) -> DMatrix<f64> {
    let m = p.nrows();
    DMatrix::from_fn(m, m, |i, j| p[(i, j)] * times[j] - times[i] * p[(i, j)])
}

/// The constant node-space operators of one segment length.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    p_mat: DMatrix<f64>,
    q_mat: DMatrix<f64>,
    h_mat: DMatrix<f64>,
    grid: CollocationGrid,
    phi_lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl OperatorSet {
    pub fn build(grid: &CollocationGrid) -> Result<Self> {
        let n = grid.n_basis();
        let basis = basis_matrices(grid);

        // Q Φ = Φ'  <=>  Φᵀ Qᵀ = Φ'ᵀ, likewise for P.
        let lu_t = basis.phi.transpose().lu();
        check_pivots(lu_t.u().diagonal().as_slice(), n)?;
        let q_ref = lu_t
            .solve(&basis.dphi.transpose())
            .ok_or(Error::NumericallySingularBasis { n })?
            .transpose();
        let p_ref = lu_t
            .solve(&basis.iphi.transpose())
            .ok_or(Error::NumericallySingularBasis { n })?
            .transpose();
        if q_ref.iter().chain(p_ref.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericallySingularBasis { n });
        }

        let half = grid.t_len() / 2.0;
        let q_mat = q_ref / half;
        let p_mat = p_ref * half;
        let h_mat = commutator(&p_mat, grid.physical_nodes());
        let phi_lu = basis.phi.lu();
        Ok(Self {
            p_mat,
            q_mat,
            h_mat,
            grid: grid.clone(),
            phi_lu,
        })
    }

    /// Cumulative integration from the first node, physical time.
    pub fn p_mat(&self) -> &DMatrix<f64> {
        &self.p_mat
    }

    /// Differentiation, physical time.
    pub fn q_mat(&self) -> &DMatrix<f64> {
        &self.q_mat
    }

    pub fn h_mat(&self) -> &DMatrix<f64> {
        &self.h_mat
    }

    pub fn grid(&self) -> &CollocationGrid {
        &self.grid
    }

    /// Same operators attached to a segment starting at `t_start`. `H` is
    /// kept as built: it is invariant under a time shift.
    pub fn shifted(&self, t_start: f64) -> Self {
        Self {
            grid: self.grid.shifted(t_start),
            ..self.clone()
        }
    }

    /// Chebyshev coefficients of the interpolant through `node_values`.
    pub fn coefficients(&self, node_values: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n_basis();
        if node_values.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} node values, got {}",
                node_values.len()
            )));
        }
        self.phi_lu
            .solve(&DVector::from_column_slice(node_values))
            .map(|c| c.as_slice().to_vec())
            .ok_or(Error::NumericallySingularBasis { n })
    }

    /// Interpolant through `node_values` at physical time `t_query`, with the
    /// operator's grid treated as lying on `[t_start, t_start + t_len]`.
    pub fn interpolate_at(&self, node_values: &[f64], t_start: f64, t_query: f64) -> Result<f64> {
        let grid = if t_start == self.grid.t_start() {
            self.grid.clone()
        } else {
            self.grid.shifted(t_start)
        };
        let tau = grid.reference_time(t_query)?;
        Ok(clenshaw(&self.coefficients(node_values)?, tau))
    }
}

fn check_pivots(diag: &[f64], n: usize) -> Result<()> {
    let scale = diag.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    let floor = scale * f64::EPSILON * n as f64;
    if scale == 0.0 || diag.iter().any(|d| !(d.abs() > floor)) {
        return Err(Error::NumericallySingularBasis { n });
    }
    Ok(())
}

/// Sum of `Σ c_k T_k(τ)`.
pub fn clenshaw(coeffs: &[f64], tau: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * tau * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + tau * b1 - b2
}

/// Evaluates the degree `N − 1` interpolant of `node_values` at `t_query`.
pub fn interpolate(grid: &CollocationGrid, node_values: &[f64], t_query: f64) -> Result<f64> {
    let n = grid.n_basis();
    if node_values.len() != n {
        return Err(Error::invalid(format!(
            "expected {n} node values, got {}",
            node_values.len()
        )));
    }
    let tau = grid.reference_time(t_query)?;
    let basis = basis_matrices(grid);
    let coeffs = basis
        .phi
        .lu()
        .solve(&DVector::from_column_slice(node_values))
        .ok_or(Error::NumericallySingularBasis { n })?;
    Ok(clenshaw(coeffs.as_slice(), tau))
}
