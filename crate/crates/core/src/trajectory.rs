//! Solver output: discrete samples plus a continuous representation used to
//! evaluate the solution between them.

use crate::cheb::clenshaw;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) enum Piece {
    /// Chebyshev series per state component on `[t0, t1]`.
    Cheb {
        t0: f64,
        t1: f64,
        coeffs: Vec<Vec<f64>>,
    },
    /// Dormand-Prince continuous extension of one accepted step.
    Dopri { t0: f64, h: f64, rcont: [Vec<f64>; 5] },
}

impl Piece {
    fn start(&self) -> f64 {
        match self {
            Piece::Cheb { t0, .. } | Piece::Dopri { t0, .. } => *t0,
        }
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        match self {
            Piece::Cheb { t0, t1, coeffs } => {
                let tau = (2.0 * (t - t0) / (t1 - t0) - 1.0).clamp(-1.0, 1.0);
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o = clenshaw(c, tau);
                }
            }
            Piece::Dopri { t0, h, rcont } => {
                let theta = (t - t0) / h;
                let theta1 = 1.0 - theta;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = rcont[0][i]
                        + theta
                            * (rcont[1][i]
                                + theta1
                                    * (rcont[2][i]
                                        + theta * (rcont[3][i] + theta1 * rcont[4][i])));
                }
            }
        }
    }
}

/// Ordered `(t, state)` samples with work counters.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Iterations used by each collocation segment (empty for step integrators).
    pub segment_iterations: Vec<usize>,
    /// Accepted steps (step integrators) or segments (collocation).
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub total_rhs_evals: u64,
    pub total_jac_evals: u64,
    /// Seconds; informational only.
    pub wall_time: f64,
    pub(crate) pieces: Vec<Piece>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("empty trajectory")
    }

    pub fn total_iterations(&self) -> usize {
        self.segment_iterations.iter().sum()
    }

    /// Values of one state component at every sample.
    pub fn component(&self, d: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[d]).collect()
    }

    /// State at an arbitrary time inside the covered span. Stored sample
    /// times return the stored state unchanged.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::invalid("empty trajectory"));
        }
        let (lo, hi) = (self.t_start(), self.t_end());
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        if let Ok(i) = self.times.binary_search_by(|s| s.total_cmp(&t)) {
            return Ok(self.states[i].clone());
        }
        if self.pieces.is_empty() {
            return Err(Error::invalid("trajectory has no continuous representation"));
        }
        let k = self
            .pieces
            .partition_point(|p| p.start() <= t)
            .saturating_sub(1);
        let mut out = vec![0.0; self.dim()];
        self.pieces[k].eval(t, &mut out);
        Ok(out)
    }

    /// States at each of `times`.
    pub fn sample_at(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        times.iter().map(|&t| self.state_at(t)).collect()
    }

    pub(crate) fn push_sample(&mut self, t: f64, state: Vec<f64>) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.push(state);
    }
}
