//! Small open rooms with hand-made base policies: FR versus SR under GPI,
//! and the plans FRP builds as refinement sweeps are added.

use firstocc_core::mdp::{build_gridworld, ActionSet, Cell, GridSpec, GridWorld, Policy};
use firstocc_core::occupancy::{fr_dp, fr_dp_action, gpi_select, sr_dp, sr_dp_action, OccupancyMatrix};
use firstocc_core::planner::{construct_plan, frp_converged, frp_k};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Report, Table};

const DP_TOL: f64 = 1e-12;

/// Deterministic policy from a per-cell move name.
fn policy_from(world: &GridWorld, choose: impl Fn(Cell) -> &'static str) -> Result<Policy> {
    let names = world.action_names();
    let actions = world
        .cells()
        .iter()
        .map(|&c| {
            let name = choose(c);
            names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| HarnessError::Report(format!("no move named {name}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Policy::Deterministic(actions))
}

fn state_of(world: &GridWorld, cell: Cell) -> Result<usize> {
    world
        .state(cell)
        .ok_or_else(|| HarnessError::Usage(format!("cell {cell} is not a free cell of the room")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Params {
    pub gamma: f64,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Fig1Params { gamma: 0.9 }
    }
}

/// A 3x5 room. `loop` reaches the goal late and then circles through it;
/// `right` passes the goal early and gets stuck at the wall.
pub fn fig1_room(gamma: f64) -> Result<(GridWorld, Vec<(&'static str, Policy)>, Cell, Cell)> {
    let spec = GridSpec::open(5, 3, ActionSet::FourConnected);
    let start = Cell::new(2, 0);
    let goal = Cell::new(2, 2);
    let world = build_gridworld(&spec, &[goal], gamma)?;
    let looping = policy_from(&world, |c| match (c.row, c.col) {
        (0, _) => "down",
        (_, col) if col >= 3 => "left",
        (2, 0) | (2, 1) => "up",
        (1, 0) | (1, 1) => "right",
        (1, 2) => "down",
        _ => "left",
    })?;
    let right = policy_from(&world, |_| "right")?;
    Ok((world, vec![("loop", looping), ("right", right)], start, goal))
}

pub fn run_fig1(config: &ExperimentConfig) -> Result<Report> {
    let p: Fig1Params = config.params()?;
    if !(0.0..1.0).contains(&p.gamma) {
        return Err(HarnessError::Usage("fig1-demo.gamma must lie in [0, 1)".into()));
    }
    let (world, policies, start, goal) = fig1_room(p.gamma)?;
    let (s0, sg) = (state_of(&world, start)?, state_of(&world, goal)?);
    let mdp = world.mdp();
    let mut r = vec![0.0; world.num_states()];
    r[sg] = 1.0;

    let mut values = Table::new("values", &["representation", "policy", "start", "goal", "value"]);
    let mut choices = Table::new("gpi_choice", &["representation", "policy", "action", "value"]);
    let names = world.action_names();
    for rep_name in ["FR", "SR"] {
        let mut action_reps: Vec<OccupancyMatrix> = Vec::new();
        for (name, pi) in &policies {
            let (state_rep, action_rep) = if rep_name == "FR" {
                (fr_dp(mdp, pi, DP_TOL)?, fr_dp_action(mdp, pi, DP_TOL)?)
            } else {
                (sr_dp(mdp, pi, DP_TOL)?, sr_dp_action(mdp, pi, DP_TOL)?)
            };
            values.push([rep_name.to_string(), name.to_string(), start.to_string(), goal.to_string(), state_rep.get(s0, sg).to_string()]);
            action_reps.push(action_rep);
        }
        let (a, pi) = gpi_select(&action_reps, &r, s0)?;
        let value = action_reps[pi].get_action(s0, a, sg);
        choices.push([rep_name.to_string(), policies[pi].0.to_string(), names[a].to_string(), value.to_string()]);
    }
    Ok(Report {
        tables: vec![values, choices],
        ..Default::default()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Params {
    pub gamma: f64,
    /// Largest refinement count reported besides the converged plan.
    pub max_k: usize,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Fig3Params { gamma: 0.9, max_k: 3 }
    }
}

/// A 5x5 room with a snake that visits every cell before reaching the
/// top-right goal, plus straight `right` and `up` policies.
pub fn fig3_room(gamma: f64) -> Result<(GridWorld, Vec<(&'static str, Policy)>, Cell, Cell)> {
    let spec = GridSpec::open(5, 5, ActionSet::FourConnected);
    let start = Cell::new(4, 0);
    let goal = Cell::new(0, 4);
    let world = build_gridworld(&spec, &[goal], gamma)?;
    let snake = policy_from(&world, |c| match (c.row, c.col) {
        (_, 4) => "up",
        (0, _) => "right",
        (4, 3) | (2, 3) => "up",
        (4, _) | (2, _) => "right",
        (3, 0) | (1, 0) => "up",
        _ => "left",
    })?;
    let right = policy_from(&world, |_| "right")?;
    let up = policy_from(&world, |_| "up")?;
    Ok((world, vec![("snake", snake), ("right", right), ("up", up)], start, goal))
}

pub fn run_fig3(config: &ExperimentConfig) -> Result<Report> {
    let p: Fig3Params = config.params()?;
    if !(0.0..1.0).contains(&p.gamma) {
        return Err(HarnessError::Usage("fig3-planning.gamma must lie in [0, 1)".into()));
    }
    let (world, policies, start, goal) = fig3_room(p.gamma)?;
    let (s0, sg) = (state_of(&world, start)?, state_of(&world, goal)?);
    let frs: Vec<OccupancyMatrix> = policies
        .iter()
        .map(|(_, pi)| fr_dp(world.mdp(), pi, DP_TOL))
        .collect::<std::result::Result<_, _>>()?;
    let names: Vec<&str> = policies.iter().map(|(n, _)| *n).collect();
    let label = |s: usize| world.cell(s).to_string();

    let mut tables = Table::new("plan_table", &["k", "row", "col", "gamma_to_goal", "policy", "subgoal_row", "subgoal_col"]);
    let mut plans = Table::new("plans", &["k", "leg", "from", "policy", "subgoal", "discount"]);
    let mut notes = Vec::new();
    let mut runs: Vec<(String, _)> = (0..=p.max_k).map(|k| (k.to_string(), frp_k(&frs, sg, k))).collect();
    runs.push(("converged".into(), frp_converged(&frs, sg)));
    for (k, table) in runs {
        let table = table?;
        for s in 0..world.num_states() {
            let (c, sub) = (world.cell(s), world.cell(table.plan_subgoal[s]));
            tables.push([
                k.clone(),
                c.row.to_string(),
                c.col.to_string(),
                table.gamma_to_goal[s].to_string(),
                names[table.plan_policy[s]].to_string(),
                sub.row.to_string(),
                sub.col.to_string(),
            ]);
        }
        let plan = construct_plan(&table, s0)?;
        for (i, leg) in plan.steps.iter().enumerate() {
            plans.push([
                k.clone(),
                i.to_string(),
                label(leg.state),
                names[leg.policy].to_string(),
                label(leg.subgoal),
                plan.discount.to_string(),
            ]);
        }
        notes.push((format!("plan_k{k}.txt"), plan.render(&names, label)));
    }
    Ok(Report {
        tables: vec![plans, tables],
        notes,
        ..Default::default()
    })
}
