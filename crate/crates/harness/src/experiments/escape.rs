//! Escape to a shelter past a barrier: alternating exploration phases and
//! escape trials with FR planning, plus a GPI-with-SR comparison.

use std::collections::BTreeSet;

use firstocc_core::mdp::{escape_barrier, Cell, GridSpec, GridWorld};
use firstocc_core::occupancy::{gpi_select_policy, OccupancyMatrix, RepKind, TransitionSample};
use firstocc_core::planner::{construct_plan, frp_converged, PlanTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Report, Series, Table};
use crate::seeds::trial_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeParams {
    /// Exploration phase + escape trial pairs.
    pub trials: usize,
    pub explore_episodes: usize,
    pub explore_steps: usize,
    pub max_steps: usize,
    pub alpha: f64,
    /// Policy taken where the plan has nothing to offer.
    pub default_policy: String,
    /// Independent repetitions; every one is reported.
    pub runs: usize,
}

impl Default for EscapeParams {
    fn default() -> Self {
        EscapeParams {
            trials: 2,
            explore_episodes: 5,
            explore_steps: 5000,
            max_steps: 50,
            alpha: 0.05,
            default_policy: "down".into(),
            runs: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arm {
    /// FR planning, re-planned after blocked moves.
    Fr,
    /// GPI over SRs with a single-goal reward.
    SrGpi,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Fr => "FR-FRP",
            Arm::SrGpi => "SR-GPI",
        }
    }

    fn kind(self) -> RepKind {
        match self {
            Arm::Fr => RepKind::Fr,
            Arm::SrGpi => RepKind::Sr,
        }
    }
}

/// One executed step of an escape trial.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeStep {
    pub state: usize,
    pub policy: usize,
    pub next: usize,
    pub replanned: bool,
    pub td_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub steps: Vec<EscapeStep>,
    pub reached: bool,
    /// Plan from the start computed before the first step, if any.
    pub initial_plan: Option<Vec<(usize, usize, usize)>>,
}

impl TrialOutcome {
    pub fn path_length(&self) -> usize {
        self.steps.len()
    }
}

pub struct EscapeAgent {
    pub arm: Arm,
    pub reps: Vec<OccupancyMatrix>,
    alpha: f64,
    default_policy: usize,
}

impl EscapeAgent {
    pub fn new(arm: Arm, world: &GridWorld, alpha: f64, default_policy: usize) -> Self {
        let n = world.num_states();
        let m = world.mdp().num_actions();
        let gamma = world.mdp().gamma();
        EscapeAgent {
            arm,
            reps: (0..m).map(|_| OccupancyMatrix::identity(arm.kind(), n, None, gamma)).collect(),
            alpha,
            default_policy,
        }
    }

    /// Moves with base policy `p` (policy `p` always takes action `p`) and
    /// updates that policy's representation.
    fn act(&mut self, world: &GridWorld, s: usize, p: usize, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
        let (next, _) = world.mdp().step(s, p, rng)?;
        let td = self.reps[p].td_update(&TransitionSample::new(s, p, 0.0, next, p), self.alpha)?;
        Ok((next, td))
    }

    /// Exploration from `from`: a uniformly random base policy every step.
    /// Returns the TD-error norms of updates to `tracked`'s representation.
    pub fn explore(&mut self, world: &GridWorld, from: usize, episodes: usize, steps: usize, tracked: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let m = self.reps.len();
        let mut curve = Vec::new();
        for _ in 0..episodes {
            let mut s = from;
            for _ in 0..steps {
                let p = rng.gen_range(0..m);
                let (next, td) = self.act(world, s, p, rng)?;
                if p == tracked {
                    curve.push(td);
                }
                s = next;
            }
        }
        Ok(curve)
    }

    fn plan(&self, goal: usize) -> Result<PlanTable> {
        Ok(frp_converged(&self.reps, goal)?)
    }

    /// One escape attempt of at most `max_steps` steps.
    pub fn escape(&mut self, world: &GridWorld, start: usize, goal: usize, max_steps: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
        let n = world.num_states();
        let mut reward = vec![0.0; n];
        reward[goal] = 1.0;
        let mut table = match self.arm {
            Arm::Fr => Some(self.plan(goal)?),
            Arm::SrGpi => None,
        };
        let initial_plan = table
            .as_ref()
            .and_then(|t| construct_plan(t, start).ok())
            .map(|p| p.steps.iter().map(|l| (l.state, l.policy, l.subgoal)).collect());
        let mut blocked_default: BTreeSet<usize> = BTreeSet::new();
        let mut out = TrialOutcome {
            steps: Vec::new(),
            reached: start == goal,
            initial_plan,
        };
        let mut s = start;
        while s != goal && out.steps.len() < max_steps {
            let planned = match &table {
                Some(t) => (t.gamma_to_goal[s] > 0.0).then(|| t.plan_policy[s]),
                None => {
                    let (p, v) = gpi_select_policy(&self.reps, &reward, s)?;
                    (v > 0.0).then_some(p)
                }
            };
            let p = match planned {
                Some(p) => p,
                None if self.arm == Arm::Fr && blocked_default.contains(&s) => rng.gen_range(0..self.reps.len()),
                None => self.default_policy,
            };
            let (next, td) = self.act(world, s, p, rng)?;
            let blocked = next == s;
            if blocked && planned.is_none() && p == self.default_policy {
                blocked_default.insert(s);
            }
            let replanned = blocked && table.is_some();
            if replanned {
                table = Some(self.plan(goal)?);
            }
            out.steps.push(EscapeStep {
                state: s,
                policy: p,
                next,
                replanned,
                td_error: td,
            });
            s = next;
        }
        out.reached = s == goal;
        Ok(out)
    }
}

/// Smallest Chebyshev distance from `cell` to either end of the barrier.
pub fn distance_to_barrier_edge(cell: Cell) -> usize {
    let barrier: Vec<Cell> = escape_barrier().collect();
    let ends = [barrier[0], barrier[barrier.len() - 1]];
    ends.iter().map(|e| e.chebyshev(cell)).min().expect("barrier has two ends")
}

struct ArmRun {
    barrier: bool,
    arm: Arm,
    run: usize,
    trials: Vec<TrialOutcome>,
    curves: Vec<(String, Vec<f64>)>,
}

fn run_arm(p: &EscapeParams, arm: Arm, barrier: bool, run: usize, root: u64) -> Result<ArmRun> {
    let env = GridSpec::escape_arena(barrier);
    let world = env.build()?;
    let start = world
        .state(env.start.expect("arena has a start"))
        .expect("start is free");
    let goal = world.goals()[0];
    let default = world
        .action_names()
        .iter()
        .position(|n| *n == p.default_policy)
        .ok_or_else(|| HarnessError::Usage(format!("escape.default_policy `{}` is not a move", p.default_policy)))?;
    let mut agent = EscapeAgent::new(arm, &world, p.alpha, default);
    // Both arms of one run see the same exploration stream.
    let mut rng = trial_rng(root, barrier as u32, run as u32);
    let mut trials = Vec::new();
    let mut curves = Vec::new();
    for t in 0..p.trials {
        let curve = agent.explore(&world, goal, p.explore_episodes, p.explore_steps, default, &mut rng)?;
        curves.push((format!("explore{}", t + 1), curve));
        let outcome = agent.escape(&world, start, goal, p.max_steps, &mut rng)?;
        let trial_curve = outcome.steps.iter().filter(|s| s.policy == default).map(|s| s.td_error).collect();
        curves.push((format!("trial{}", t + 1), trial_curve));
        trials.push(outcome);
    }
    Ok(ArmRun {
        barrier,
        arm,
        run,
        trials,
        curves,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let p: EscapeParams = config.params()?;
    if p.trials == 0 || p.explore_episodes == 0 || p.explore_steps == 0 || p.max_steps == 0 || p.runs == 0 {
        return Err(HarnessError::Usage("escape counts must be at least 1".into()));
    }
    if !(p.alpha > 0.0 && p.alpha <= 1.0) {
        return Err(HarnessError::Usage("escape.alpha must lie in (0, 1]".into()));
    }
    let world = GridSpec::escape_arena(true).build()?;
    let open = GridSpec::escape_arena(false).build()?;

    let mut runs = Vec::new();
    for run in 0..p.runs {
        for (arm, barrier) in [(Arm::Fr, true), (Arm::SrGpi, true), (Arm::Fr, false), (Arm::SrGpi, false)] {
            runs.push(run_arm(&p, arm, barrier, run, config.seed)?);
        }
    }

    let mut trials = Table::new("trials", &["run", "arm", "barrier", "trial", "reached", "path_length"]);
    let mut steps = Table::new("trajectories", &["run", "arm", "barrier", "trial", "t", "row", "col", "policy", "next_row", "next_col", "replanned"]);
    let mut plans = Table::new("plans", &["run", "arm", "barrier", "trial", "leg", "from", "policy", "subgoal", "subgoal_edge_distance"]);
    let names = world.action_names();
    for r in &runs {
        let w = if r.barrier { &world } else { &open };
        for (t, outcome) in r.trials.iter().enumerate() {
            let key = [r.run.to_string(), r.arm.as_str().to_string(), r.barrier.to_string(), (t + 1).to_string()];
            trials.push(key.iter().cloned().chain([outcome.reached.to_string(), outcome.path_length().to_string()]));
            for (i, step) in outcome.steps.iter().enumerate() {
                let (a, b) = (w.cell(step.state), w.cell(step.next));
                steps.push(key.iter().cloned().chain([
                    i.to_string(),
                    a.row.to_string(),
                    a.col.to_string(),
                    names[step.policy].to_string(),
                    b.row.to_string(),
                    b.col.to_string(),
                    step.replanned.to_string(),
                ]));
            }
            for (leg, &(from, policy, sub)) in outcome.initial_plan.iter().flatten().enumerate() {
                let sub_cell = w.cell(sub);
                plans.push(key.iter().cloned().chain([
                    leg.to_string(),
                    w.cell(from).to_string(),
                    names[policy].to_string(),
                    sub_cell.to_string(),
                    distance_to_barrier_edge(sub_cell).to_string(),
                ]));
            }
        }
    }

    let mut series = Vec::new();
    for arm in [Arm::Fr, Arm::SrGpi] {
        let arm_runs: Vec<&ArmRun> = runs.iter().filter(|r| r.arm == arm && r.barrier).collect();
        for (phase, _) in &arm_runs[0].curves {
            let curves: Vec<&Vec<f64>> = arm_runs
                .iter()
                .flat_map(|r| r.curves.iter().filter(|(name, _)| name == phase).map(|(_, c)| c))
                .collect();
            let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
            let mut s = Series::new(format!("td_{}_{phase}", arm.as_str().to_lowercase()), "step", "td_error_norm_mean", "td_error_norm_std");
            for i in 0..len {
                let samples: Vec<f64> = curves.iter().filter_map(|c| c.get(i).copied()).collect();
                s.push_samples(i as f64, &samples);
            }
            if !s.points.is_empty() {
                series.push(s);
            }
        }
    }
    let mut tables = vec![trials, steps];
    if !plans.rows.is_empty() {
        tables.push(plans);
    }
    Ok(Report {
        tables,
        series,
        ..Default::default()
    })
}
