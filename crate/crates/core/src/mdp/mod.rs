//! Finite MDPs, stationary policies and the environment builders used by
//! every tabular experiment.
//!
//! Rewards are state-based and collected on arrival: a transition
//! `s --a--> s'` pays `reward[s']`. Environments whose canonical
//! parameterization rewards specific transitions (wall bumps in grids, the
//! self-loops of RiverSwim and SixArms) carry an additional dense
//! `(s, a, s')` reward term that is added on top.

mod exploration_envs;
mod grid;
mod random;

pub use exploration_envs::{build_exploration_env, load_exploration_env, ExplorationEnvFile};
pub use grid::{
    build_gridworld, escape_barrier, parse_grid_env, ActionSet, Cell, GridEnv, GridSpec, GridWorld, Move,
};
pub use random::{random_deterministic_mdp, random_mdp};

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{ensure, Error, Result};

const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    /// Flattened `(s, a, s')`, row-major.
    transition: Vec<f64>,
    reward: Vec<f64>,
    transition_reward: Option<Vec<f64>>,
    gamma: f64,
    initial_dist: Vec<f64>,
    terminal_states: BTreeSet<usize>,
}

impl TabularMdp {
    /// Builds an MDP and checks every structural invariant.
    ///
    /// `transition` is flattened as `(s * num_actions + a) * num_states + s'`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        gamma: f64,
        initial_dist: Vec<f64>,
        terminal_states: BTreeSet<usize>,
    ) -> Result<Self> {
        let mdp = TabularMdp {
            num_states,
            num_actions,
            transition,
            reward,
            transition_reward: None,
            gamma,
            initial_dist,
            terminal_states,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Attaches a per-transition reward term, flattened like the transition
    /// tensor.
    pub fn with_transition_reward(mut self, transition_reward: Vec<f64>) -> Result<Self> {
        ensure!(
            transition_reward.len() == self.transition.len(),
            InvalidSpec,
            "transition reward has {} entries, expected {}",
            transition_reward.len(),
            self.transition.len()
        );
        ensure!(
            transition_reward.iter().all(|r| r.is_finite()),
            InvalidSpec,
            "transition rewards must be finite"
        );
        self.transition_reward = Some(transition_reward);
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_reward(mut self, reward: Vec<f64>) -> Result<Self> {
        self.reward = reward;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_dist(mut self, initial_dist: Vec<f64>) -> Result<Self> {
        self.initial_dist = initial_dist;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = (self.num_states, self.num_actions);
        ensure!(n >= 1 && m >= 1, InvalidSpec, "need at least one state and one action");
        ensure!(
            self.transition.len() == n * m * n,
            InvalidSpec,
            "transition tensor has {} entries, expected {}",
            self.transition.len(),
            n * m * n
        );
        ensure!(self.reward.len() == n, InvalidSpec, "reward length {} != {n}", self.reward.len());
        ensure!(
            self.reward.iter().all(|r| r.is_finite()),
            InvalidSpec,
            "rewards must be finite"
        );
        ensure!(
            (0.0..1.0).contains(&self.gamma),
            InvalidSpec,
            "gamma {} outside [0, 1)",
            self.gamma
        );
        ensure!(
            self.initial_dist.len() == n,
            InvalidSpec,
            "initial distribution length {} != {n}",
            self.initial_dist.len()
        );
        check_simplex(&self.initial_dist, "initial distribution")?;
        for s in 0..n {
            for a in 0..m {
                check_simplex(self.row(s, a), &format!("transition row ({s}, {a})"))?;
            }
        }
        for &t in &self.terminal_states {
            ensure!(t < n, InvalidSpec, "terminal state {t} out of range");
            for a in 0..m {
                ensure!(
                    (self.prob(t, a, t) - 1.0).abs() <= PROB_TOL,
                    InvalidSpec,
                    "terminal state {t} does not self-loop under action {a}"
                );
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn terminal_states(&self) -> &BTreeSet<usize> {
        &self.terminal_states
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal_states.contains(&s)
    }

    /// Next-state distribution for `(s, a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.num_actions + a) * self.num_states;
        &self.transition[start..start + self.num_states]
    }

    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.row(s, a)[next]
    }

    /// Reward paid by the transition `s --a--> next`.
    pub fn transition_reward(&self, s: usize, a: usize, next: usize) -> f64 {
        let extra = self
            .transition_reward
            .as_ref()
            .map_or(0.0, |t| t[(s * self.num_actions + a) * self.num_states + next]);
        self.reward[next] + extra
    }

    /// Expected one-step reward of taking `a` in `s`.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        self.row(s, a)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(next, &p)| p * self.transition_reward(s, a, next))
            .sum()
    }

    /// True when every transition row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.transition.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    /// Successor of `(s, a)` when the row is a point mass.
    pub fn successor(&self, s: usize, a: usize) -> Option<usize> {
        let row = self.row(s, a);
        row.iter().position(|&p| p == 1.0)
    }

    pub fn check_state(&self, s: usize) -> Result<()> {
        ensure!(s < self.num_states, Contract, "state {s} out of range (< {})", self.num_states);
        Ok(())
    }

    pub fn check_action(&self, a: usize) -> Result<()> {
        ensure!(a < self.num_actions, Contract, "action {a} out of range (< {})", self.num_actions);
        Ok(())
    }

    /// Samples `(next_state, reward)` for taking `a` in `s`.
    pub fn step<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Result<(usize, f64)> {
        self.check_state(s)?;
        self.check_action(a)?;
        let next = sample_index(self.row(s, a), rng);
        Ok((next, self.transition_reward(s, a, next)))
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.initial_dist, rng)
    }

    /// State-to-state transition matrix under `pi`:
    /// `P(s, s') = sum_a pi(a|s) p(s'|s, a)`.
    pub fn policy_matrix(&self, pi: &Policy) -> Result<DMatrix<f64>> {
        pi.validate(self.num_states, self.num_actions)?;
        let n = self.num_states;
        let mut p = DMatrix::zeros(n, n);
        for s in 0..n {
            for a in 0..self.num_actions {
                let w = pi.prob(s, a);
                if w == 0.0 {
                    continue;
                }
                for (next, &q) in self.row(s, a).iter().enumerate() {
                    p[(s, next)] += w * q;
                }
            }
        }
        Ok(p)
    }
}

fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    ensure!(
        p.iter().all(|&x| (0.0..=1.0).contains(&x)),
        InvalidSpec,
        "{what} has an entry outside [0, 1]"
    );
    let total: f64 = p.iter().sum();
    ensure!(
        (total - 1.0).abs() <= PROB_TOL,
        InvalidSpec,
        "{what} sums to {total}, not 1"
    );
    Ok(())
}

/// Inverse-CDF draw from a probability vector. Falls back to the last
/// index with positive mass when rounding leaves the draw uncovered.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// One action per state.
    Deterministic(Vec<usize>),
    /// A distribution over actions per state.
    Stochastic(Vec<Vec<f64>>),
}

impl Policy {
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Policy::Stochastic(vec![vec![1.0 / num_actions as f64; num_actions]; num_states])
    }

    pub fn num_states(&self) -> usize {
        match self {
            Policy::Deterministic(a) => a.len(),
            Policy::Stochastic(p) => p.len(),
        }
    }

    pub fn validate(&self, num_states: usize, num_actions: usize) -> Result<()> {
        ensure!(
            self.num_states() == num_states,
            Contract,
            "policy covers {} states, MDP has {num_states}",
            self.num_states()
        );
        match self {
            Policy::Deterministic(actions) => {
                if let Some(bad) = actions.iter().find(|&&a| a >= num_actions) {
                    return Err(Error::Contract(format!("policy action {bad} out of range")));
                }
            }
            Policy::Stochastic(rows) => {
                for (s, row) in rows.iter().enumerate() {
                    ensure!(
                        row.len() == num_actions,
                        Contract,
                        "policy row {s} has {} actions, expected {num_actions}",
                        row.len()
                    );
                    check_simplex(row, &format!("policy row {s}"))
                        .map_err(|e| Error::Contract(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        match self {
            Policy::Deterministic(actions) => (actions[s] == a) as u8 as f64,
            Policy::Stochastic(rows) => rows[s][a],
        }
    }

    /// The action taken in `s` when the policy is deterministic there.
    pub fn deterministic_action(&self, s: usize) -> Option<usize> {
        match self {
            Policy::Deterministic(actions) => Some(actions[s]),
            Policy::Stochastic(rows) => rows[s].iter().position(|&p| p == 1.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        match self {
            Policy::Deterministic(actions) => actions[s],
            Policy::Stochastic(rows) => sample_index(&rows[s], rng),
        }
    }
}

/// The deterministic policy that takes `a` in every state.
pub fn one_action_policy(mdp: &TabularMdp, a: usize) -> Result<Policy> {
    mdp.check_action(a)?;
    Ok(Policy::Deterministic(vec![a; mdp.num_states()]))
}
