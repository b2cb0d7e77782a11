//! The `plan` and `learn-fr` commands.

use std::path::Path;

use firstocc_core::mdp::{one_action_policy, Cell, GridEnv, GridWorld, Policy};
use firstocc_core::occupancy::{fr_dp, OccupancyMatrix, RepKind, TransitionSample};
use firstocc_core::planner::{construct_plan, frp_converged, Plan};
use rand::Rng;

use crate::error::{HarnessError, Result};
use crate::report::{Report, Table};
use crate::seeds::stream_rng;

fn load_world(env: &Path) -> Result<(GridEnv, GridWorld)> {
    let grid = GridEnv::load(env)?;
    let world = grid.build()?;
    Ok((grid, world))
}

fn action_policy(world: &GridWorld, name: &str) -> Result<(usize, Policy)> {
    let names = world.action_names();
    let a = names
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| HarnessError::Usage(format!("unknown policy `{name}` (moves: {})", names.join(", "))))?;
    Ok((a, one_action_policy(world.mdp(), a)?))
}

fn free_state(world: &GridWorld, cell: Cell, what: &str) -> Result<usize> {
    world
        .state(cell)
        .ok_or_else(|| HarnessError::Usage(format!("{what} {cell} is not a free cell")))
}

/// Plans from the map's start (or the first free cell) to `goal` with the
/// exact FRs of the named single-move policies.
pub fn plan(env: &Path, goal: Cell, policy_names: &[String]) -> Result<(Plan, Report)> {
    if policy_names.is_empty() {
        return Err(HarnessError::Usage("--policies needs at least one name".into()));
    }
    let (grid, world) = load_world(env)?;
    let goal_state = free_state(&world, goal, "goal")?;
    let start = match grid.start {
        Some(c) => free_state(&world, c, "start")?,
        None => 0,
    };
    let policies: Vec<Policy> = policy_names
        .iter()
        .map(|n| action_policy(&world, n).map(|(_, p)| p))
        .collect::<Result<_>>()?;
    let frs: Vec<OccupancyMatrix> = policies
        .iter()
        .map(|pi| fr_dp(world.mdp(), pi, 1e-12))
        .collect::<std::result::Result<_, _>>()?;
    let table = frp_converged(&frs, goal_state)?;
    let plan = construct_plan(&table, start)?;
    let names: Vec<&str> = policy_names.iter().map(String::as_str).collect();
    let label = |s: usize| world.cell(s).to_string();

    let mut rows = Table::new("plan_table", &["row", "col", "gamma_to_goal", "policy", "subgoal_row", "subgoal_col"]);
    for s in 0..world.num_states() {
        let (c, sub) = (world.cell(s), world.cell(table.plan_subgoal[s]));
        rows.push([
            c.row.to_string(),
            c.col.to_string(),
            table.gamma_to_goal[s].to_string(),
            names[table.plan_policy[s]].to_string(),
            sub.row.to_string(),
            sub.col.to_string(),
        ]);
    }
    let mut legs = Table::new("plan", &["leg", "from", "policy", "subgoal", "discount"]);
    for (i, leg) in plan.steps.iter().enumerate() {
        legs.push([i.to_string(), label(leg.state), names[leg.policy].to_string(), label(leg.subgoal), plan.discount.to_string()]);
    }
    if legs.rows.is_empty() {
        legs.push(["0".to_string(), label(start), "-".into(), label(start), plan.discount.to_string()]);
    }
    let report = Report {
        tables: vec![legs, rows],
        notes: vec![("plan.txt".into(), plan.render(&names, label))],
        ..Default::default()
    };
    Ok((plan, report))
}

/// Outcome of TD learning one policy's FR.
pub struct LearnedFr {
    pub fr: OccupancyMatrix,
    /// `max |F_td - F_dp|` over all entries.
    pub max_error: f64,
    pub mean_td_error: f64,
}

/// TD-learns the FR of a single-move policy over `steps` transitions,
/// restarting from a uniformly random free cell every `restart` steps.
pub fn learn_fr(env: &Path, policy: &str, steps: usize, alpha: f64, restart: usize, seed: u64) -> Result<LearnedFr> {
    if steps == 0 || restart == 0 {
        return Err(HarnessError::Usage("--steps and --restart must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(HarnessError::Usage(format!("--alpha {alpha} outside (0, 1]")));
    }
    let (_, world) = load_world(env)?;
    let (a, pi) = action_policy(&world, policy)?;
    let mdp = world.mdp();
    let n = world.num_states();
    let mut rng = stream_rng(seed, 0);
    let mut fr = OccupancyMatrix::identity(RepKind::Fr, n, None, mdp.gamma());
    let mut s = rng.gen_range(0..n);
    let mut total = 0.0;
    for t in 0..steps {
        if t > 0 && t % restart == 0 {
            s = rng.gen_range(0..n);
        }
        let (next, _) = mdp.step(s, a, &mut rng)?;
        total += fr.fr_td_update(&TransitionSample::new(s, a, 0.0, next, a), alpha)?;
        s = next;
    }
    let exact = fr_dp(mdp, &pi, 1e-12)?;
    Ok(LearnedFr {
        max_error: fr.max_abs_diff(&exact),
        mean_td_error: total / steps as f64,
        fr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROOM: &str = "; actions = 4\n; gamma = 0.9\nS..\n.#.\n..G\n";

    fn room() -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), ROOM).unwrap();
        f
    }

    #[test]
    fn plans_around_the_pillar() {
        let f = room();
        let names: Vec<String> = ["right", "down"].iter().map(|s| s.to_string()).collect();
        let (plan, report) = plan(f.path(), Cell::new(2, 2), &names).unwrap();
        assert!((plan.discount - 0.9f64.powi(4)).abs() < 1e-12);
        assert_eq!(plan.steps.len(), 2);
        assert!(report.table("plan_table").is_some());
        let bad = plan_err(f.path(), Cell::new(1, 1));
        assert!(matches!(bad, HarnessError::Usage(_)));
    }

    fn plan_err(env: &Path, goal: Cell) -> HarnessError {
        match plan(env, goal, &["right".to_string()]) {
            Err(e) => e,
            Ok(_) => panic!("expected an error"),
        }
    }

    #[test]
    fn single_move_cannot_reach_behind() {
        let f = room();
        let err = plan(f.path(), Cell::new(2, 0), &["right".to_string()]).unwrap_err();
        assert!(matches!(err, HarnessError::Core(firstocc_core::Error::NoPlan(_))));
    }

    #[test]
    fn learned_fr_is_close() {
        let f = room();
        let learned = learn_fr(f.path(), "down", 20_000, 0.1, 5, 3).unwrap();
        assert!(learned.max_error < 0.02, "{}", learned.max_error);
        assert!(matches!(learn_fr(f.path(), "jump", 10, 0.1, 5, 0), Err(HarnessError::Usage(_))));
    }
}
