//! FourRooms with resampled goals: FRP at several refinement counts, GPI and
//! value iteration, with and without action slip.

use std::collections::BTreeMap;

use firstocc_core::mdp::{build_gridworld, one_action_policy, GridSpec, GridWorld, Policy, TabularMdp};
use firstocc_core::occupancy::{gpi_select_policy, OccupancyMatrix, RepKind, TransitionSample};
use firstocc_core::planner::{frp_converged, frp_k, value_iteration, PlanTable};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{summarize, Report, Series, Table};
use crate::seeds::trial_rng;

const EPISODE_ARM: u32 = 1;
const PRETRAIN_ARM: u32 = 1 << 12;
const VI_TOL: f64 = 1e-8;
const VI_MAX_ITERS: usize = 100_000;

/// Pre-training of the base-policy FRs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrTraining {
    pub episodes: usize,
    /// Length of the rollout started from every free cell in each episode.
    pub steps: usize,
    pub alpha: f64,
}

impl Default for FrTraining {
    fn default() -> Self {
        FrTraining {
            episodes: 50,
            steps: 20,
            alpha: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourRoomsParams {
    pub episodes: usize,
    pub steps: usize,
    pub gamma: f64,
    pub slip: f64,
    /// FRP is run with every refinement count from 0 to this value, plus
    /// to convergence.
    pub k_iters: usize,
    /// Truncation points for value iteration; the converged solution is
    /// always included.
    pub vi_iters: Vec<usize>,
    /// Agents whose visited states are written to `trajectories.csv`.
    pub dump_trajectories: Vec<String>,
    pub pretrain: FrTraining,
}

impl Default for FourRoomsParams {
    fn default() -> Self {
        FourRoomsParams {
            episodes: 100,
            steps: 75,
            gamma: 0.95,
            slip: 0.0,
            k_iters: 3,
            vi_iters: vec![1, 2, 3, 5, 10, 20, 50],
            dump_trajectories: vec!["FRP-K0".into(), "GPI".into()],
            pretrain: FrTraining::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub episodes: usize,
    pub steps: usize,
    pub gamma: f64,
    pub slips: Vec<f64>,
    pub pretrain: FrTraining,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            episodes: 100,
            steps: 75,
            gamma: 0.95,
            slips: (0..=10).map(|i| i as f64 / 10.0).collect(),
            pretrain: FrTraining::default(),
        }
    }
}

/// The four-rooms layout with the given slip and discount, no goals.
pub fn four_rooms_world(slip: f64, gamma: f64) -> Result<GridWorld> {
    let env = GridSpec::four_rooms();
    let mut spec = env.spec;
    spec.slip = slip;
    Ok(build_gridworld(&spec, &[], gamma)?)
}

/// Learns the FR of every single-action policy by TD: each episode starts
/// one rollout from every free cell. Returns the FRs and the mean TD-error
/// norm of each episode, per policy.
pub fn pretrain_frs(world: &GridWorld, cfg: &FrTraining, root: u64, arm_offset: u32) -> Result<(Vec<OccupancyMatrix>, Vec<Vec<f64>>)> {
    let mdp = world.mdp();
    let n = world.num_states();
    let out: Vec<(OccupancyMatrix, Vec<f64>)> = (0..mdp.num_actions())
        .into_par_iter()
        .map(|a| {
            let mut rng = trial_rng(root, PRETRAIN_ARM + arm_offset, a as u32);
            let mut fr = OccupancyMatrix::identity(RepKind::Fr, n, None, mdp.gamma());
            let mut curve = Vec::with_capacity(cfg.episodes);
            for _ in 0..cfg.episodes {
                let mut total = 0.0;
                for start in 0..n {
                    let mut s = start;
                    for _ in 0..cfg.steps {
                        let (next, _) = mdp.step(s, a, &mut rng)?;
                        total += fr.fr_td_update(&TransitionSample::new(s, a, 0.0, next, a), cfg.alpha)?;
                        s = next;
                    }
                }
                curve.push(total / (n * cfg.steps) as f64);
            }
            Ok((fr, curve))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().unzip())
}

fn td_series(name: &str, curves: &[Vec<f64>]) -> Series {
    let mut series = Series::new(name, "episode", "td_error_norm_mean", "td_error_norm_std");
    let len = curves.iter().map(Vec::len).min().unwrap_or(0);
    for e in 0..len {
        let samples: Vec<f64> = curves.iter().map(|c| c[e]).collect();
        series.push_samples(e as f64, &samples);
    }
    series
}

/// A controller described by one action per state for every possible goal.
pub struct Agent {
    pub name: String,
    /// `actions[goal][state]`.
    pub actions: Vec<Vec<usize>>,
}

fn plan_actions(table: &PlanTable, policies: &[Policy]) -> Vec<usize> {
    (0..table.num_states())
        .map(|s| policies[table.plan_policy[s]].deterministic_action(s).expect("single-action base policies"))
        .collect()
}

/// Model with `goal` absorbing and paying the goal reward on arrival.
fn goal_model(slip: f64, gamma: f64, goal: usize) -> Result<TabularMdp> {
    let env = GridSpec::four_rooms();
    let mut spec = env.spec;
    spec.slip = slip;
    spec.terminal_goals = true;
    let base = build_gridworld(&spec, &[], gamma)?;
    let cell = base.cell(goal);
    Ok(build_gridworld(&spec, &[cell], gamma)?.into_mdp())
}

fn frp_agent(name: String, frs: &[OccupancyMatrix], policies: &[Policy], k: Option<usize>) -> Result<Agent> {
    let n = frs[0].num_states();
    let actions = (0..n)
        .into_par_iter()
        .map(|goal| {
            let table = match k {
                Some(k) => frp_k(frs, goal, k)?,
                None => frp_converged(frs, goal)?,
            };
            Ok(plan_actions(&table, policies))
        })
        .collect::<Result<_>>()?;
    Ok(Agent { name, actions })
}

fn gpi_agent(frs: &[OccupancyMatrix], policies: &[Policy], goal_reward: f64) -> Result<Agent> {
    let n = frs[0].num_states();
    let actions = (0..n)
        .map(|goal| {
            let mut r = vec![0.0; n];
            r[goal] = goal_reward;
            (0..n)
                .map(|s| {
                    let (p, _) = gpi_select_policy(frs, &r, s)?;
                    Ok(policies[p].deterministic_action(s).expect("single-action base policies"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Agent { name: "GPI".into(), actions })
}

/// Value-iteration agents for each truncation point (`None` = converged),
/// solved on the true model.
fn vi_agents(n: usize, slip: f64, gamma: f64, iters: &[Option<usize>]) -> Result<Vec<Agent>> {
    let per_goal: Vec<Vec<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|goal| {
            let mdp = goal_model(slip, gamma, goal)?;
            iters
                .iter()
                .map(|k| {
                    let vi = value_iteration(&mdp, VI_TOL, k.unwrap_or(VI_MAX_ITERS))?;
                    Ok((0..n).map(|s| vi.policy.deterministic_action(s).expect("greedy policy")).collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(iters
        .iter()
        .enumerate()
        .map(|(i, k)| Agent {
            name: k.map_or("VI-converged".to_string(), |k| format!("VI-K{k}")),
            actions: per_goal.iter().map(|g| g[i].clone()).collect(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub goals_reached: usize,
    pub total_return: f64,
    pub states: Vec<usize>,
}

/// One episode from `start`. The goal is drawn uniformly among the other
/// free cells and redrawn on every arrival, which pays `goal_reward`.
pub fn run_episode<R: Rng>(world: &GridWorld, agent: &Agent, start: usize, steps: usize, goal_reward: f64, rng: &mut R) -> Result<EpisodeResult> {
    let n = world.num_states();
    let draw_goal = |from: usize, rng: &mut R| {
        let g = rng.gen_range(0..n - 1);
        if g >= from {
            g + 1
        } else {
            g
        }
    };
    let mut s = start;
    let mut goal = draw_goal(s, rng);
    let mut result = EpisodeResult {
        goals_reached: 0,
        total_return: 0.0,
        states: vec![s],
    };
    for _ in 0..steps {
        let a = agent.actions[goal][s];
        let (next, r) = world.mdp().step(s, a, rng)?;
        result.total_return += r;
        result.states.push(next);
        s = next;
        if s == goal {
            result.goals_reached += 1;
            result.total_return += goal_reward;
            goal = draw_goal(s, rng);
        }
    }
    Ok(result)
}

/// Runs every agent over the same per-episode random streams.
fn evaluate(world: &GridWorld, agents: &[Agent], episodes: usize, steps: usize, start: usize, goal_reward: f64, root: u64, arm: u32) -> Result<Vec<Vec<EpisodeResult>>> {
    agents
        .iter()
        .map(|agent| {
            (0..episodes)
                .into_par_iter()
                .map(|e| run_episode(world, agent, start, steps, goal_reward, &mut trial_rng(root, arm, e as u32)))
                .collect()
        })
        .collect()
}

fn start_state(world: &GridWorld) -> Result<usize> {
    let env = GridSpec::four_rooms();
    let cell = env.start.ok_or_else(|| HarnessError::Report("four-rooms map has no start".into()))?;
    world
        .state(cell)
        .ok_or_else(|| HarnessError::Report("four-rooms start is a wall".into()))
}

fn check_common(episodes: usize, steps: usize, gamma: f64, pretrain: &FrTraining) -> Result<()> {
    if episodes == 0 || steps == 0 || pretrain.episodes == 0 || pretrain.steps == 0 {
        return Err(HarnessError::Usage("episode and step counts must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&gamma) || !(pretrain.alpha > 0.0 && pretrain.alpha <= 1.0) {
        return Err(HarnessError::Usage("gamma must lie in [0, 1) and alpha in (0, 1]".into()));
    }
    Ok(())
}

fn slip_ok(slip: f64) -> Result<()> {
    if (0.0..=1.0).contains(&slip) {
        Ok(())
    } else {
        Err(HarnessError::Usage(format!("slip {slip} outside [0, 1]")))
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let p: FourRoomsParams = config.params()?;
    check_common(p.episodes, p.steps, p.gamma, &p.pretrain)?;
    slip_ok(p.slip)?;
    let goal_reward = GridSpec::four_rooms().spec.goal_reward;
    let world = four_rooms_world(p.slip, p.gamma)?;
    let start = start_state(&world)?;
    let policies: Vec<Policy> = (0..world.mdp().num_actions())
        .map(|a| one_action_policy(world.mdp(), a))
        .collect::<std::result::Result<_, _>>()?;
    let (frs, curves) = pretrain_frs(&world, &p.pretrain, config.seed, 0)?;

    let mut agents = Vec::new();
    for k in 0..=p.k_iters {
        agents.push(frp_agent(format!("FRP-K{k}"), &frs, &policies, Some(k))?);
    }
    agents.push(frp_agent("FRP-converged".into(), &frs, &policies, None)?);
    agents.push(gpi_agent(&frs, &policies, goal_reward)?);
    let mut iters: Vec<Option<usize>> = p.vi_iters.iter().map(|&k| Some(k)).collect();
    iters.push(None);
    agents.extend(vi_agents(world.num_states(), p.slip, p.gamma, &iters)?);

    let results = evaluate(&world, &agents, p.episodes, p.steps, start, goal_reward, config.seed, EPISODE_ARM)?;
    let mut episodes = Table::new("episodes", &["agent", "episode", "goals_reached", "return"]);
    let mut trajectories = Table::new("trajectories", &["agent", "episode", "t", "row", "col"]);
    for (agent, runs) in agents.iter().zip(&results) {
        let dump = p.dump_trajectories.contains(&agent.name);
        for (e, r) in runs.iter().enumerate() {
            episodes.push([agent.name.clone(), e.to_string(), r.goals_reached.to_string(), r.total_return.to_string()]);
            if dump {
                for (t, &s) in r.states.iter().enumerate() {
                    let c = world.cell(s);
                    trajectories.push([agent.name.clone(), e.to_string(), t.to_string(), c.row.to_string(), c.col.to_string()]);
                }
            }
        }
    }
    let with_task: Table = {
        let mut t = Table::new("episodes_tagged", &["task", "agent", "goals_reached", "return"]);
        for r in &episodes.rows {
            t.push(["fourrooms".to_string(), r[0].clone(), r[2].clone(), r[3].clone()]);
        }
        t
    };
    let summary = summarize(&with_task, "task", "agent", "goals_reached", "summary")?;
    let summary_return = summarize(&with_task, "task", "agent", "return", "summary_return")?;

    let mut series = vec![td_series("td_curve", &curves)];
    let mut frp_series = Series::new("frp_goals", "k", "goals_mean", "goals_std");
    let mut vi_series = Series::new("vi_goals", "iterations", "goals_mean", "goals_std");
    for (agent, runs) in agents.iter().zip(&results) {
        let goals: Vec<f64> = runs.iter().map(|r| r.goals_reached as f64).collect();
        if let Some(k) = agent.name.strip_prefix("FRP-K").and_then(|k| k.parse::<f64>().ok()) {
            frp_series.push_samples(k, &goals);
        }
        if let Some(k) = agent.name.strip_prefix("VI-K").and_then(|k| k.parse::<f64>().ok()) {
            vi_series.push_samples(k, &goals);
        }
    }
    series.push(frp_series);
    if !vi_series.points.is_empty() {
        series.push(vi_series);
    }
    let mut tables = vec![episodes, summary, summary_return];
    if !trajectories.rows.is_empty() {
        tables.push(trajectories);
    }
    Ok(Report {
        tables,
        series,
        ..Default::default()
    })
}

pub fn run_noise(config: &ExperimentConfig) -> Result<Report> {
    let p: NoiseParams = config.params()?;
    check_common(p.episodes, p.steps, p.gamma, &p.pretrain)?;
    if p.slips.is_empty() {
        return Err(HarnessError::Usage("fourrooms-noise.slips is empty".into()));
    }
    for &slip in &p.slips {
        slip_ok(slip)?;
    }
    let goal_reward = GridSpec::four_rooms().spec.goal_reward;
    let mut episodes = Table::new("episodes", &["slip", "agent", "episode", "goals_reached", "return"]);
    let mut by_agent: BTreeMap<String, Series> = BTreeMap::new();
    for (i, &slip) in p.slips.iter().enumerate() {
        let world = four_rooms_world(slip, p.gamma)?;
        let start = start_state(&world)?;
        let policies: Vec<Policy> = (0..world.mdp().num_actions())
            .map(|a| one_action_policy(world.mdp(), a))
            .collect::<std::result::Result<_, _>>()?;
        let (frs, _) = pretrain_frs(&world, &p.pretrain, config.seed, 16 * (i as u32 + 1))?;
        let mut agents = vec![frp_agent("FRP-converged".into(), &frs, &policies, None)?, gpi_agent(&frs, &policies, goal_reward)?];
        agents.extend(vi_agents(world.num_states(), slip, p.gamma, &[None])?);
        let results = evaluate(&world, &agents, p.episodes, p.steps, start, goal_reward, config.seed, EPISODE_ARM + 1 + i as u32)?;
        for (agent, runs) in agents.iter().zip(&results) {
            for (e, r) in runs.iter().enumerate() {
                episodes.push([slip.to_string(), agent.name.clone(), e.to_string(), r.goals_reached.to_string(), r.total_return.to_string()]);
            }
            let goals: Vec<f64> = runs.iter().map(|r| r.goals_reached as f64).collect();
            by_agent
                .entry(agent.name.clone())
                .or_insert_with(|| Series::new(format!("goals_{}", agent.name.to_lowercase()), "slip", "goals_mean", "goals_std"))
                .push_samples(slip, &goals);
        }
    }
    let summary = summarize(&episodes, "slip", "agent", "goals_reached", "summary")?;
    let summary_return = summarize(&episodes, "slip", "agent", "return", "summary_return")?;
    Ok(Report {
        tables: vec![episodes, summary, summary_return],
        series: by_agent.into_values().collect(),
        ..Default::default()
    })
}
