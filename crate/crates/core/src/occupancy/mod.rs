//! First-occupancy (FR) and successor (SR) representations.
//!
//! `F(s, s')` is the expected discount at the first visit to `s'` when
//! starting in `s`; `M(s, s')` is the expected discounted number of visits.
//! Both are stored as dense matrices whose rows are indexed by state, or by
//! `(state, action)` pairs for action-conditioned representations, and whose
//! columns are indexed by target state.

mod dp;
mod io;
mod td;

pub use dp::{
    first_passage_column, first_passage_oracle, fr_bellman_apply, fr_dp, fr_dp_action,
    fr_iterate, sr_dp, sr_dp_action, DEFAULT_TOL,
};
pub use td::TransitionSample;

use nalgebra::DMatrix;

use crate::error::{ensure, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    Fr,
    Sr,
}

impl RepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepKind::Fr => "FR",
            RepKind::Sr => "SR",
        }
    }
}

impl std::str::FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FR" | "fr" => Ok(RepKind::Fr),
            "SR" | "sr" => Ok(RepKind::Sr),
            other => Err(Error::Parse(format!("unknown representation kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyMatrix {
    pub kind: RepKind,
    pub gamma: f64,
    num_states: usize,
    /// `Some(m)` when rows are `(state, action)` pairs.
    num_actions: Option<usize>,
    values: DMatrix<f64>,
}

impl OccupancyMatrix {
    pub fn from_values(
        kind: RepKind,
        gamma: f64,
        num_actions: Option<usize>,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        let n = values.ncols();
        let rows = n * num_actions.unwrap_or(1);
        ensure!(
            values.nrows() == rows,
            Contract,
            "{} rows for {n} states and {:?} actions",
            values.nrows(),
            num_actions
        );
        ensure!((0.0..1.0).contains(&gamma), Contract, "gamma {gamma} outside [0, 1)");
        Ok(OccupancyMatrix {
            kind,
            gamma,
            num_states: n,
            num_actions,
            values,
        })
    }

    /// The TD starting point: one on each row's own state, zero elsewhere.
    pub fn identity(kind: RepKind, num_states: usize, num_actions: Option<usize>, gamma: f64) -> Self {
        let m = num_actions.unwrap_or(1);
        let mut values = DMatrix::zeros(num_states * m, num_states);
        for s in 0..num_states {
            for a in 0..m {
                values[(s * m + a, s)] = 1.0;
            }
        }
        OccupancyMatrix {
            kind,
            gamma,
            num_states,
            num_actions,
            values,
        }
    }

    pub fn zeros(kind: RepKind, num_states: usize, num_actions: Option<usize>, gamma: f64) -> Self {
        let m = num_actions.unwrap_or(1);
        OccupancyMatrix {
            kind,
            gamma,
            num_states,
            num_actions,
            values: DMatrix::zeros(num_states * m, num_states),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> Option<usize> {
        self.num_actions
    }

    pub fn is_action_conditioned(&self) -> bool {
        self.num_actions.is_some()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    /// Row index of `(s, a)`; `a` is ignored for state-only matrices.
    pub fn row_index(&self, s: usize, a: usize) -> usize {
        match self.num_actions {
            Some(m) => s * m + a,
            None => s,
        }
    }

    /// `F(s, target)` or `M(s, target)` for a state-only matrix.
    pub fn get(&self, s: usize, target: usize) -> f64 {
        self.values[(s, target)]
    }

    pub fn get_action(&self, s: usize, a: usize, target: usize) -> f64 {
        self.values[(self.row_index(s, a), target)]
    }

    pub fn row_vec(&self, row: usize) -> Vec<f64> {
        self.values.row(row).iter().copied().collect()
    }

    /// l1 norm of a row.
    pub fn row_norm(&self, row: usize) -> f64 {
        self.values.row(row).iter().map(|x| x.abs()).sum()
    }

    /// `||F(s)||_1` for a state-only FR.
    pub fn fr_norm(&self, s: usize) -> Result<f64> {
        ensure!(self.kind == RepKind::Fr, Contract, "fr_norm needs an FR, got {}", self.kind.as_str());
        ensure!(!self.is_action_conditioned(), Contract, "fr_norm needs a state-indexed FR");
        ensure!(s < self.num_states, Contract, "state {s} out of range");
        Ok(self.row_norm(s))
    }

    /// `r^T rep(row)` for every row: Q-values for the SR, first-visit
    /// Q-values for the FR.
    pub fn evaluate(&self, r: &[f64]) -> Result<Vec<f64>> {
        ensure!(
            r.len() == self.num_states,
            Contract,
            "reward has {} entries, representation has {} states",
            r.len(),
            self.num_states
        );
        let r = nalgebra::DVector::from_column_slice(r);
        Ok((&self.values * r).iter().copied().collect())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &OccupancyMatrix) -> f64 {
        (&self.values - &other.values).abs().max()
    }
}

/// Upper bound on `||F(s)||_1` for an FR over `num_states` states.
pub fn fr_norm_bound(gamma: f64, num_states: usize) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    (1.0 - gamma.powi(num_states as i32 + 1)) / (1.0 - gamma)
}

/// Policy evaluation with a cached representation.
pub fn evaluate_with_rep(rep: &OccupancyMatrix, r: &[f64]) -> Result<Vec<f64>> {
    rep.evaluate(r)
}

/// Generalized policy improvement over action-conditioned representations:
/// `argmax_{a, pi} r^T rep_pi(s, a)`. Ties go to the lowest policy index,
/// then the lowest action. Returns `(action, policy_index)`.
pub fn gpi_select(reps: &[OccupancyMatrix], r: &[f64], s: usize) -> Result<(usize, usize)> {
    ensure!(!reps.is_empty(), Contract, "GPI needs at least one policy");
    let first = &reps[0];
    let m = first
        .num_actions()
        .ok_or_else(|| Error::Contract("GPI needs action-conditioned representations".into()))?;
    for rep in reps {
        ensure!(
            rep.num_actions() == Some(m) && rep.num_states() == first.num_states(),
            Contract,
            "GPI representations differ in shape"
        );
    }
    ensure!(r.len() == first.num_states(), Contract, "reward length mismatch");
    ensure!(s < first.num_states(), Contract, "state {s} out of range");

    let mut best = (0, 0);
    let mut best_value = f64::NEG_INFINITY;
    for (p, rep) in reps.iter().enumerate() {
        for a in 0..m {
            let row = rep.values.row(rep.row_index(s, a));
            let v: f64 = row.iter().zip(r).map(|(x, w)| x * w).sum();
            if v > best_value {
                best_value = v;
                best = (a, p);
            }
        }
    }
    Ok(best)
}

/// GPI over state-indexed representations: the policy maximising
/// `r^T rep_pi(s)`, lowest index on ties. With a single rewarded goal this
/// is `argmax_pi F_pi(s, goal)`.
pub fn gpi_select_policy(reps: &[OccupancyMatrix], r: &[f64], s: usize) -> Result<(usize, f64)> {
    ensure!(!reps.is_empty(), Contract, "GPI needs at least one policy");
    let n = reps[0].num_states();
    ensure!(r.len() == n, Contract, "reward length mismatch");
    ensure!(s < n, Contract, "state {s} out of range");
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (p, rep) in reps.iter().enumerate() {
        ensure!(
            !rep.is_action_conditioned() && rep.num_states() == n,
            Contract,
            "state GPI needs state-indexed representations of equal shape"
        );
        let v: f64 = rep.values.row(s).iter().zip(r).map(|(x, w)| x * w).sum();
        if v > best_value {
            best_value = v;
            best = p;
        }
    }
    Ok((best, best_value))
}
