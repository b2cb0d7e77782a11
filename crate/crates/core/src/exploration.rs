//! Sarsa with occupancy-norm exploration bonuses.
//!
//! The agent learns a state-indexed representation of its own behaviour
//! policy alongside Q and adds an intrinsic bonus to every reward:
//! `beta / ||M(s)||_1` for the SR, `beta * ||F(s)||_1` for the FR.

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::mdp::TabularMdp;
use crate::occupancy::{OccupancyMatrix, RepKind, TransitionSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BonusKind {
    None,
    SrInverseNorm,
    FrNorm,
}

impl BonusKind {
    pub const ALL: [BonusKind; 3] = [BonusKind::FrNorm, BonusKind::SrInverseNorm, BonusKind::None];

    pub fn as_str(self) -> &'static str {
        match self {
            BonusKind::None => "none",
            BonusKind::SrInverseNorm => "sr_inverse_norm",
            BonusKind::FrNorm => "fr_norm",
        }
    }

    /// Display label of the agent using this bonus.
    pub fn method_name(self) -> &'static str {
        match self {
            BonusKind::None => "Sarsa",
            BonusKind::SrInverseNorm => "Sarsa+SR",
            BonusKind::FrNorm => "Sarsa+FR",
        }
    }
}

impl std::str::FromStr for BonusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "sarsa" => Ok(BonusKind::None),
            "sr" | "sr_inverse_norm" => Ok(BonusKind::SrInverseNorm),
            "fr" | "fr_norm" => Ok(BonusKind::FrNorm),
            other => Err(Error::Parse(format!("unknown bonus kind `{other}`"))),
        }
    }
}

/// Starting point of the learned representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepInit {
    Identity,
    Zero,
}

impl RepInit {
    /// Zero for the SR, so the first visits to a state pay the largest
    /// bonus; identity for the FR.
    pub fn default_for(kind: BonusKind) -> Self {
        match kind {
            BonusKind::SrInverseNorm => RepInit::Zero,
            _ => RepInit::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SarsaConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub bonus_kind: BonusKind,
    pub beta: f64,
    pub rep_alpha: f64,
    /// Compute the bonus from the representation row after this step's TD
    /// update rather than before it.
    pub post_update_bonus: bool,
    /// `None` picks [`RepInit::default_for`] the bonus kind.
    pub rep_init: Option<RepInit>,
}

impl Default for SarsaConfig {
    fn default() -> Self {
        SarsaConfig {
            alpha: 0.1,
            gamma: 0.95,
            epsilon: 0.1,
            bonus_kind: BonusKind::None,
            beta: 0.0,
            rep_alpha: 0.1,
            post_update_bonus: true,
            rep_init: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BonusSarsaAgent {
    pub config: SarsaConfig,
    num_actions: usize,
    /// Row-major `(state, action)`.
    q_values: Vec<f64>,
    rep: Option<OccupancyMatrix>,
}

impl BonusSarsaAgent {
    pub fn new(num_states: usize, num_actions: usize, config: SarsaConfig) -> Result<Self> {
        ensure!(num_states > 0 && num_actions > 0, Contract, "empty state or action space");
        for (name, v) in [("alpha", config.alpha), ("epsilon", config.epsilon), ("rep_alpha", config.rep_alpha)] {
            ensure!(v > 0.0 && v <= 1.0, Contract, "{name} {v} outside (0, 1]");
        }
        ensure!(config.beta.is_finite(), Contract, "beta must be finite");
        ensure!((0.0..1.0).contains(&config.gamma), Contract, "gamma outside [0, 1)");
        let kind = match config.bonus_kind {
            BonusKind::None => None,
            BonusKind::SrInverseNorm => Some(RepKind::Sr),
            BonusKind::FrNorm => Some(RepKind::Fr),
        };
        let init = config.rep_init.unwrap_or(RepInit::default_for(config.bonus_kind));
        let rep = kind.map(|k| match init {
            RepInit::Identity => OccupancyMatrix::identity(k, num_states, None, config.gamma),
            RepInit::Zero => OccupancyMatrix::zeros(k, num_states, None, config.gamma),
        });
        Ok(BonusSarsaAgent {
            config,
            num_actions,
            q_values: vec![0.0; num_states * num_actions],
            rep,
        })
    }

    pub fn q_row(&self, s: usize) -> &[f64] {
        &self.q_values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.q_values[s * self.num_actions + a]
    }

    pub fn rep(&self) -> Option<&OccupancyMatrix> {
        self.rep.as_ref()
    }

    /// Intrinsic bonus for state `s` under the current representation.
    /// The SR norm is floored at `rep_alpha`, the smallest norm a single
    /// TD step from a zero row can produce.
    pub fn bonus(&self, s: usize) -> f64 {
        let beta = self.config.beta;
        match (&self.rep, self.config.bonus_kind) {
            (Some(m), BonusKind::SrInverseNorm) => beta / m.row_norm(s).max(self.config.rep_alpha),
            (Some(f), BonusKind::FrNorm) => beta * f.row_norm(s),
            _ => 0.0,
        }
    }

    pub fn act<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        epsilon_greedy(self.q_row(s), self.config.epsilon, rng)
    }
}

/// With probability `epsilon` a uniformly random action, otherwise the
/// greedy one (lowest index on ties). Panics on an empty row.
pub fn epsilon_greedy<R: Rng + ?Sized>(q_row: &[f64], epsilon: f64, rng: &mut R) -> usize {
    assert!(!q_row.is_empty(), "epsilon_greedy needs at least one action");
    if rng.gen::<f64>() < epsilon {
        return rng.gen_range(0..q_row.len());
    }
    argmax(q_row)
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One Sarsa step with the intrinsic bonus. Also TD-updates the
/// representation with the state transition. Returns the bonus used.
pub fn sarsa_bonus_update(agent: &mut BonusSarsaAgent, sample: &TransitionSample) -> Result<f64> {
    let n = agent.q_values.len() / agent.num_actions;
    ensure!(sample.s < n && sample.s_next < n, Contract, "sample state out of range");
    ensure!(
        sample.a < agent.num_actions && sample.a_next < agent.num_actions,
        Contract,
        "sample action out of range"
    );
    let cfg = agent.config;
    let mut bonus = agent.bonus(sample.s);
    if let Some(rep) = agent.rep.as_mut() {
        rep.td_update(sample, cfg.rep_alpha)?;
        if cfg.post_update_bonus {
            bonus = agent.bonus(sample.s);
        }
    }
    let m = agent.num_actions;
    let next_q = agent.q_values[sample.s_next * m + sample.a_next];
    let q = &mut agent.q_values[sample.s * m + sample.a];
    let delta = sample.r + bonus + cfg.gamma * next_q - *q;
    *q += cfg.alpha * delta;
    Ok(bonus)
}

/// One continuing trial of `horizon` steps from an initial-state draw.
/// Returns the undiscounted sum of extrinsic rewards.
pub fn run_exploration_trial<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    agent: &mut BonusSarsaAgent,
    horizon: usize,
    rng: &mut R,
) -> Result<f64> {
    ensure!(
        agent.q_values.len() == mdp.num_states() * mdp.num_actions(),
        Contract,
        "agent and environment differ in size"
    );
    let mut s = mdp.sample_initial(rng);
    let mut a = agent.act(s, rng);
    let mut total = 0.0;
    for _ in 0..horizon {
        let (next, r) = mdp.step(s, a, rng)?;
        let a_next = agent.act(next, rng);
        sarsa_bonus_update(agent, &TransitionSample::new(s, a, r, next, a_next))?;
        total += r;
        s = next;
        a = a_next;
    }
    Ok(total)
}
