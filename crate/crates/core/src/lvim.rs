//! The local variational iteration engine.
//!
//! On each segment the node states `X` (`M × D`, one row per collocation
//! node) are corrected by
//!
//! ```text
//! R      = Q X − g(X)
//! ΔX_j   = J(t_j, X_j) (H R)_j − (P R)_j
//! X     ← X + ΔX
//! ```
//!
//! until the correction is below the tolerance. Frozen mode uses one Jacobian
//! evaluated at the segment start for every node and every iteration.

use nalgebra::DMatrix;
use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::time::Instant;

use crate::cheb::{CollocationGrid, OperatorSet};
use crate::error::{Error, Result};
use crate::system::{checked_rhs, OdeSystem};
use crate::trajectory::{Piece, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JacobianMode {
    Full,
    Frozen,
}

impl std::str::FromStr for JacobianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(JacobianMode::Full),
            "frozen" => Ok(JacobianMode::Frozen),
            other => Err(Error::invalid(format!(
                "unknown jacobian mode {other:?} (expected full or frozen)"
            ))),
        }
    }
}

impl std::fmt::Display for JacobianMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            JacobianMode::Full => "full",
            JacobianMode::Frozen => "frozen",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub n_basis: usize,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
}

impl SolverConfig {
    pub fn new(n_basis: usize, dt: f64, tol: f64) -> Self {
        Self {
            n_basis,
            dt,
            tol,
            max_iter: 100,
            jacobian_mode: JacobianMode::Full,
        }
    }

    pub fn frozen(self) -> Self {
        Self {
            jacobian_mode: JacobianMode::Frozen,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_basis < 2 {
            return Err(Error::invalid(format!("N must be at least 2, got {}", self.n_basis)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SegmentResult {
    /// `M × D`, row `j` is the state at node `j`.
    pub node_states: DMatrix<f64>,
    pub iterations: usize,
    pub final_correction: f64,
    pub converged: bool,
    /// Max-norm of every correction, in order.
    pub corrections: Vec<f64>,
    pub rhs_evals: u64,
    pub jac_evals: u64,
}

impl SegmentResult {
    pub fn last_state(&self) -> Vec<f64> {
        let m = self.node_states.nrows();
        self.node_states.row(m - 1).iter().copied().collect()
    }
}

/// `R = Q X − g(X)` on the operator grid's physical nodes.
pub fn residual(
    ops: &OperatorSet,
    system: &dyn OdeSystem,
    node_states: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    residual_at(ops, ops.grid().physical_nodes(), system, node_states)
}

fn residual_at(
    ops: &OperatorSet,
    times: &[f64],
    system: &dyn OdeSystem,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (m, d) = x.shape();
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        let j = pos % m;
        let row: Vec<f64> = x.row(j).iter().copied().collect();
        return Err(Error::domain(times[j], &row, "state is not finite"));
    }
    let mut r = ops.q_mat() * x;
    let mut state = vec![0.0; d];
    let mut g = vec![0.0; d];
    for j in 0..m {
        for (k, s) in state.iter_mut().enumerate() {
            *s = x[(j, k)];
        }
        checked_rhs(system, times[j], &state, &mut g)?;
        for k in 0..d {
            r[(j, k)] -= g[k];
        }
    }
    Ok(r)
}

/// Full-Jacobian iteration on the operator grid.
pub fn iterate_segment(
    ops: &OperatorSet,
    system: &dyn OdeSystem,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SegmentResult> {
    iterate_on(ops, ops.grid().physical_nodes(), system, x0, config, JacobianMode::Full)
}

/// Frozen-Jacobian iteration on the operator grid.
pub fn iterate_segment_frozen(
    ops: &OperatorSet,
    system: &dyn OdeSystem,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SegmentResult> {
    iterate_on(ops, ops.grid().physical_nodes(), system, x0, config, JacobianMode::Frozen)
}

/// Convergence test per state component: the correction must fall below
/// `tol`, or below the rounding level of that component's magnitude when
/// that is larger.
fn has_converged(correction: &DMatrix<f64>, x: &DMatrix<f64>, tol: f64) -> bool {
    (0..x.ncols()).all(|k| {
        let scale = x.column(k).amax();
        let floor = 16.0 * f64::EPSILON * scale;
        correction.column(k).amax() < tol.max(floor)
    })
}

fn iterate_on(
    ops: &OperatorSet,
    times: &[f64],
    system: &dyn OdeSystem,
    x0: &[f64],
    config: &SolverConfig,
    mode: JacobianMode,
) -> Result<SegmentResult> {
    config.validate()?;
    let d = system.dim();
    let m = ops.grid().n_nodes();
    if x0.len() != d {
        return Err(Error::invalid(format!(
            "initial state has {} components, system has {d}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(times[0], x0, "initial state is not finite"));
    }

    let mut x = DMatrix::from_fn(m, d, |_, k| x0[k]);
    let mut jac = DMatrix::zeros(d, d);
    let mut jac_evals = 0;
    if mode == JacobianMode::Frozen {
        system.jacobian(times[0], x0, &mut jac)?;
        jac_evals += 1;
    }
    let mut r = residual_at(ops, times, system, &x)?;
    let mut rhs_evals = m as u64;
    let mut corrections = Vec::new();
    let mut state = vec![0.0; d];

    for iteration in 1..=config.max_iter {
        let hr = ops.h_mat() * &r;
        let pr = ops.p_mat() * &r;
        let mut delta = DMatrix::zeros(m, d);
        // Row 0 of P and H is zero, so the first node never moves.
        for j in 1..m {
            if mode == JacobianMode::Full {
                for (k, s) in state.iter_mut().enumerate() {
                    *s = x[(j, k)];
                }
                system.jacobian(times[j], &state, &mut jac)?;
                jac_evals += 1;
            }
            for a in 0..d {
                let mut acc = 0.0;
                for b in 0..d {
                    acc += jac[(a, b)] * hr[(j, b)];
                }
                delta[(j, a)] = acc - pr[(j, a)];
            }
        }
        let size = delta.amax();
        corrections.push(size);
        if !size.is_finite() {
            return Err(Error::NoConvergence {
                iterations: iteration,
                last_correction: size,
                hint: "the iteration diverged; reduce dt".into(),
            });
        }
        x += &delta;
        if has_converged(&delta, &x, config.tol) {
            return Ok(SegmentResult {
                node_states: x,
                iterations: iteration,
                final_correction: size,
                converged: true,
                corrections,
                rhs_evals,
                jac_evals,
            });
        }
        if iteration < config.max_iter {
            r = residual_at(ops, times, system, &x)?;
            rhs_evals += m as u64;
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iter,
        last_correction: corrections.last().copied().unwrap_or(f64::NAN),
        hint: "reduce dt or raise max_iter".into(),
    })
}

/// Caches operator sets by segment length.
#[derive(Default)]
struct OperatorCache {
    sets: HashMap<(usize, u64), OperatorSet>,
}

impl OperatorCache {
    fn get(&mut self, n: usize, len: f64) -> Result<&OperatorSet> {
        let key = (n, len.to_bits());
        match self.sets.entry(key) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => Ok(e.insert(OperatorSet::build(&CollocationGrid::new(n, 0.0, len)?)?)),
        }
    }
}

/// Segment boundaries `t0 = s_0 < s_1 < … < s_K = tf`. Interior boundaries
/// are `t0 + k dt`; a remainder shorter than `1e-9 dt` is merged into the
/// last segment.
pub fn segment_bounds(t0: f64, tf: f64, dt: f64) -> Vec<f64> {
    let span = tf - t0;
    let mut full = (span / dt).floor() as usize;
    let rem = span - full as f64 * dt;
    if rem <= 1e-9 * dt && full > 0 {
        full -= 1;
    }
    let mut bounds: Vec<f64> = (0..=full).map(|k| t0 + k as f64 * dt).collect();
    bounds.push(tf);
    bounds
}

/// Result of a march that may stop early.
#[derive(Debug, Clone)]
pub struct MarchOutcome {
    pub trajectory: Trajectory,
    /// Set when the march ended before `tf` because a segment failed.
    pub error: Option<Error>,
    /// Set when the stop predicate ended the march.
    pub stopped: bool,
}

/// Marches `[t0, tf]` segment by segment. All collocation nodes become
/// samples; the node shared by adjacent segments is stored once.
pub fn march(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<Trajectory> {
    let out = march_with(system, t0, tf, x0, config, &mut |_, _| false)?;
    match out.error {
        Some(e) => Err(e),
        None => Ok(out.trajectory),
    }
}

/// Like [`march`] but returns the trajectory computed before a failing
/// segment along with the error, so a solution can be followed up to the
/// edge of its domain.
pub fn march_partial(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<MarchOutcome> {
    march_with(system, t0, tf, x0, config, &mut |_, _| false)
}

/// Like [`march`], stopping after the first segment for which
/// `stop(node_times, node_states)` returns true.
pub fn march_until(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    config: &SolverConfig,
    stop: &mut dyn FnMut(&[f64], &DMatrix<f64>) -> bool,
) -> Result<MarchOutcome> {
    march_with(system, t0, tf, x0, config, stop)
}

fn march_with(
    system: &dyn OdeSystem,
    t0: f64,
    tf: f64,
    x0: &[f64],
    config: &SolverConfig,
    stop: &mut dyn FnMut(&[f64], &DMatrix<f64>) -> bool,
) -> Result<MarchOutcome> {
    config.validate()?;
    if !(tf > t0) || !t0.is_finite() || !tf.is_finite() {
        return Err(Error::invalid(format!("need t0 < tf, got [{t0}, {tf}]")));
    }
    if x0.len() != system.dim() {
        return Err(Error::invalid(format!(
            "initial state has {} components, system has {}",
            x0.len(),
            system.dim()
        )));
    }
    let started = Instant::now();
    let bounds = segment_bounds(t0, tf, config.dt);
    let mut cache = OperatorCache::default();
    let mut traj = Trajectory::default();
    traj.push_sample(t0, x0.to_vec());
    let mut x_start = x0.to_vec();
    let mut error = None;
    let mut stopped = false;

    for (index, w) in bounds.windows(2).enumerate() {
        let (s0, s1) = (w[0], w[1]);
        let len = if index + 2 < bounds.len() { config.dt } else { s1 - s0 };
        let ops = cache.get(config.n_basis, len)?;
        let mut times: Vec<f64> = ops.grid().physical_nodes().iter().map(|t| s0 + t).collect();
        *times.last_mut().unwrap() = s1;

        let seg = match iterate_on(ops, &times, system, &x_start, config, config.jacobian_mode) {
            Ok(seg) => seg,
            Err(source) => {
                error = Some(Error::Segment {
                    index,
                    t_start: s0,
                    source: Box::new(source),
                });
                break;
            }
        };
        let coeffs = (0..system.dim())
            .map(|k| ops.coefficients(seg.node_states.column(k).as_slice()))
            .collect::<Result<Vec<_>>>()?;
        traj.pieces.push(Piece::Cheb { t0: s0, t1: s1, coeffs });
        for (j, &t) in times.iter().enumerate().skip(1) {
            traj.push_sample(t, seg.node_states.row(j).iter().copied().collect());
        }
        traj.segment_iterations.push(seg.iterations);
        traj.accepted_steps += 1;
        traj.total_rhs_evals += seg.rhs_evals;
        traj.total_jac_evals += seg.jac_evals;
        x_start = seg.last_state();
        if stop(&times, &seg.node_states) {
            stopped = true;
            break;
        }
    }
    traj.wall_time = started.elapsed().as_secs_f64();
    Ok(MarchOutcome {
        trajectory: traj,
        error,
        stopped,
    })
}
