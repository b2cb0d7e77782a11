//! Temporal-difference learning for FR and SR matrices.
//!
//! Both updates are full-row: a single transition moves every target
//! column of the row `(s_t, a_t)` at once.

use crate::error::{ensure, Result};

use super::{OccupancyMatrix, RepKind};

/// One step of experience `(s_t, a_t, r_t, s_{t+1}, a_{t+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionSample {
    pub s: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: usize,
    pub a_next: usize,
}

impl TransitionSample {
    pub fn new(s: usize, a: usize, r: f64, s_next: usize, a_next: usize) -> Self {
        TransitionSample {
            s,
            a,
            r,
            s_next,
            a_next,
        }
    }
}

impl OccupancyMatrix {
    fn check_sample(&self, sample: &TransitionSample, alpha: f64) -> Result<()> {
        let n = self.num_states();
        ensure!(
            sample.s < n && sample.s_next < n,
            Contract,
            "sample states ({}, {}) out of range",
            sample.s,
            sample.s_next
        );
        if let Some(m) = self.num_actions() {
            ensure!(
                sample.a < m && sample.a_next < m,
                Contract,
                "sample actions ({}, {}) out of range",
                sample.a,
                sample.a_next
            );
        }
        ensure!(alpha > 0.0 && alpha <= 1.0, Contract, "alpha {alpha} outside (0, 1]");
        Ok(())
    }

    /// FR TD step. For every target `t`:
    /// `delta = 1(s = t) + gamma (1 - 1(s = t)) F(s', a', t) - F(s, a, t)`.
    ///
    /// Returns the l2 norm of the TD-error row.
    pub fn fr_td_update(&mut self, sample: &TransitionSample, alpha: f64) -> Result<f64> {
        ensure!(self.kind == RepKind::Fr, Contract, "fr_td_update on an {}", self.kind.as_str());
        self.check_sample(sample, alpha)?;
        let gamma = self.gamma;
        Ok(self.row_update(sample, alpha, |t, s, next| {
            if t == s {
                1.0
            } else {
                gamma * next
            }
        }))
    }

    /// SR TD step: `delta = e_s + gamma M(s', a') - M(s, a)`.
    pub fn sr_td_update(&mut self, sample: &TransitionSample, alpha: f64) -> Result<f64> {
        ensure!(self.kind == RepKind::Sr, Contract, "sr_td_update on an {}", self.kind.as_str());
        self.check_sample(sample, alpha)?;
        let gamma = self.gamma;
        Ok(self.row_update(sample, alpha, |t, s, next| (t == s) as u8 as f64 + gamma * next))
    }

    /// Dispatches on the representation kind.
    pub fn td_update(&mut self, sample: &TransitionSample, alpha: f64) -> Result<f64> {
        match self.kind {
            RepKind::Fr => self.fr_td_update(sample, alpha),
            RepKind::Sr => self.sr_td_update(sample, alpha),
        }
    }

    fn row_update(
        &mut self,
        sample: &TransitionSample,
        alpha: f64,
        target: impl Fn(usize, usize, f64) -> f64,
    ) -> f64 {
        let row = self.row_index(sample.s, sample.a);
        let next_row = self.row_index(sample.s_next, sample.a_next);
        // Read the bootstrap row before writing: it may be the same row.
        let bootstrap = self.row_vec(next_row);
        let values = self.values_mut();
        let mut sq = 0.0;
        for (t, &next) in bootstrap.iter().enumerate() {
            let delta = target(t, sample.s, next) - values[(row, t)];
            values[(row, t)] += alpha * delta;
            sq += delta * delta;
        }
        sq.sqrt()
    }
}
