//! Sarsa, Sarsa+SR and Sarsa+FR on RiverSwim and SixArms.

use firstocc_core::exploration::{run_exploration_trial, BonusKind, BonusSarsaAgent, SarsaConfig};
use firstocc_core::mdp::{build_exploration_env, TabularMdp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{mean_std, summarize, Report, Table};
use crate::seeds::trial_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationParams {
    pub tasks: Vec<String>,
    pub trials: usize,
    pub steps: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub rep_alpha: f64,
    /// Candidate bonus scales; the best one per (task, bonus) is kept.
    pub betas: Vec<f64>,
    /// Trials per candidate during selection, on streams not used for the
    /// reported trials.
    pub sweep_trials: usize,
}

impl Default for ExplorationParams {
    fn default() -> Self {
        let magnitudes = [0.01, 0.05, 0.1, 0.5, 1.0, 10.0, 100.0];
        let betas = magnitudes.iter().flat_map(|m| [*m, -*m]).collect();
        ExplorationParams {
            tasks: vec!["riverswim".into(), "sixarms".into()],
            trials: 100,
            steps: 5000,
            alpha: 0.1,
            epsilon: 0.1,
            gamma: 0.95,
            rep_alpha: 0.1,
            betas,
            sweep_trials: 20,
        }
    }
}

const SWEEP_ARM_BASE: u32 = 1 << 16;

fn arm(task: usize, kind: usize) -> u32 {
    (task * 8 + kind) as u32
}

fn sweep_arm(task: usize, kind: usize, beta: usize) -> u32 {
    SWEEP_ARM_BASE + (task * 8 + kind) as u32 * 256 + beta as u32
}

fn run_trials(
    mdp: &TabularMdp,
    p: &ExplorationParams,
    kind: BonusKind,
    beta: f64,
    root: u64,
    arm: u32,
    trials: usize,
) -> Result<Vec<f64>> {
    let cfg = SarsaConfig {
        alpha: p.alpha,
        gamma: p.gamma,
        epsilon: p.epsilon,
        bonus_kind: kind,
        beta,
        rep_alpha: p.rep_alpha,
        ..Default::default()
    };
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(root, arm, trial as u32);
            let mut agent = BonusSarsaAgent::new(mdp.num_states(), mdp.num_actions(), cfg)?;
            Ok(run_exploration_trial(mdp, &mut agent, p.steps, &mut rng)?)
        })
        .collect()
}

fn validate(p: &ExplorationParams) -> Result<()> {
    if p.trials == 0 || p.steps == 0 || p.sweep_trials == 0 {
        return Err(HarnessError::Usage("exploration counts must be at least 1".into()));
    }
    if p.tasks.is_empty() || p.betas.is_empty() {
        return Err(HarnessError::Usage("exploration needs at least one task and one beta".into()));
    }
    Ok(())
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let p: ExplorationParams = config.params()?;
    validate(&p)?;
    let mut trials = Table::new("trials", &["task", "bonus_kind", "beta", "seed", "cumulative_reward"]);
    let mut sweep = Table::new("beta_sweep", &["task", "bonus_kind", "beta", "mean", "std", "n"]);
    for (ti, task) in p.tasks.iter().enumerate() {
        let mdp = build_exploration_env(task)?;
        for (ki, kind) in BonusKind::ALL.into_iter().enumerate() {
            let beta = if kind == BonusKind::None {
                0.0
            } else {
                let mut best = (f64::NEG_INFINITY, p.betas[0]);
                for (bi, &beta) in p.betas.iter().enumerate() {
                    let scores = run_trials(&mdp, &p, kind, beta, config.seed, sweep_arm(ti, ki, bi), p.sweep_trials)?;
                    let (m, s) = mean_std(&scores).expect("sweep_trials >= 1");
                    sweep.push([task.clone(), kind.as_str().into(), beta.to_string(), m.to_string(), s.to_string(), scores.len().to_string()]);
                    if m > best.0 {
                        best = (m, beta);
                    }
                }
                best.1
            };
            let scores = run_trials(&mdp, &p, kind, beta, config.seed, arm(ti, ki), p.trials)?;
            for (i, r) in scores.iter().enumerate() {
                trials.push([task.clone(), kind.as_str().into(), beta.to_string(), i.to_string(), r.to_string()]);
            }
        }
    }
    let mut summary = summarize(&trials, "task", "bonus_kind", "cumulative_reward", "summary")?;
    for row in &mut summary.rows {
        let kind: BonusKind = row[1].parse()?;
        row[1] = kind.method_name().to_string();
    }
    Ok(Report {
        tables: vec![trials, summary, sweep],
        ..Default::default()
    })
}
