//! Planning over a library of base policies with their FRs.
//!
//! FR planning keeps, for every state, the best known discount-to-goal
//! `G(s)` together with the policy to follow and the state at which to
//! switch. Each refinement sweep considers every `(policy, subgoal)` pair:
//!
//! ```text
//! G_{k+1}(s) = max_{pi, s'} F_pi(s, s') G_k(s')
//! ```
//!
//! starting from `G_1(s) = max_pi F_pi(s, goal)`. Following the recorded
//! policy in each state executes the plan implicitly; [`construct_plan`]
//! unrolls it into an explicit list of `(policy, subgoal)` legs.

mod multi_goal;
mod oracle;
mod vi;

pub use multi_goal::{multi_goal_discounts, optimal_goal_ordering, GoalDiscountMatrix, MAX_ORDERED_GOALS};
pub use oracle::shortest_path_oracle;
pub use vi::{value_iteration, vi_iteration_bound, ViResult};

use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::mdp::{Policy, TabularMdp};
use crate::occupancy::{OccupancyMatrix, RepKind};

/// Smallest improvement that counts as progress in a refinement sweep.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PlanTable {
    /// Expected discount of the best plan from each state to the goal.
    pub gamma_to_goal: Vec<f64>,
    /// Index of the base policy to follow in each state.
    pub plan_policy: Vec<usize>,
    /// State at which to switch away from `plan_policy`.
    pub plan_subgoal: Vec<usize>,
    pub goal: usize,
    /// Number of discount tables computed, the initial one included.
    pub iterations_used: usize,
    /// True when the last sweep improved nothing.
    pub converged: bool,
    /// Multiply-compare operations spent, `O(K |Pi| |S|^2)`.
    pub work: u64,
    /// `G_k` after every iteration, for monotonicity checks.
    pub history: Vec<Vec<f64>>,
}

impl PlanTable {
    pub fn num_states(&self) -> usize {
        self.gamma_to_goal.len()
    }
}

fn check_frs(frs: &[OccupancyMatrix]) -> Result<usize> {
    ensure!(!frs.is_empty(), Contract, "planning needs at least one base policy");
    let n = frs[0].num_states();
    for f in frs {
        ensure!(f.kind == RepKind::Fr, Contract, "planning needs FRs, got an {}", f.kind.as_str());
        ensure!(!f.is_action_conditioned(), Contract, "planning needs state-indexed FRs");
        ensure!(f.num_states() == n, Contract, "FRs differ in size");
        ensure!(f.gamma == frs[0].gamma, Contract, "FRs differ in discount");
    }
    Ok(n)
}

/// FR planning towards `goal`.
///
/// `max_iters` bounds the number of discount tables computed: 1 yields the
/// greedy table `G_1` (identical to GPI with a single-goal reward), `K + 1`
/// allows `K` refinement sweeps. Iteration stops early once no state
/// improves by more than `tol`. Unreachable states keep `G(s) = 0`.
pub fn frp(frs: &[OccupancyMatrix], goal: usize, max_iters: usize, tol: f64) -> Result<PlanTable> {
    let n = check_frs(frs)?;
    ensure!(goal < n, Contract, "goal {goal} out of range");
    ensure!(max_iters >= 1, Contract, "max_iters must be at least 1");

    let mut gamma_to_goal = vec![0.0; n];
    let mut plan_policy = vec![0; n];
    let plan_subgoal = vec![goal; n];
    for s in 0..n {
        let mut best = f64::NEG_INFINITY;
        for (p, f) in frs.iter().enumerate() {
            let v = f.get(s, goal);
            if v > best {
                best = v;
                plan_policy[s] = p;
            }
        }
        gamma_to_goal[s] = best.clamp(0.0, 1.0);
    }

    let mut table = PlanTable {
        history: vec![gamma_to_goal.clone()],
        gamma_to_goal,
        plan_policy,
        plan_subgoal,
        goal,
        iterations_used: 1,
        converged: false,
        work: (frs.len() * n) as u64,
    };

    while table.iterations_used < max_iters {
        let improved = refine(frs, &mut table, tol);
        table.iterations_used += 1;
        table.work += (frs.len() * n * n) as u64;
        table.history.push(table.gamma_to_goal.clone());
        if !improved {
            table.converged = true;
            break;
        }
    }
    Ok(table)
}

/// One synchronous sweep. Candidates are visited in `(policy, subgoal)`
/// order and only strict improvements replace the incumbent, so ties keep
/// the lowest indices.
fn refine(frs: &[OccupancyMatrix], table: &mut PlanTable, tol: f64) -> bool {
    let n = table.num_states();
    let previous = table.gamma_to_goal.clone();
    let mut best = previous.clone();
    let mut choice: Vec<Option<(usize, usize)>> = vec![None; n];
    for (p, f) in frs.iter().enumerate() {
        let values = f.values();
        for (sub, &g) in previous.iter().enumerate() {
            if g <= 0.0 {
                continue;
            }
            let column = values.column(sub);
            for s in 0..n {
                let v = column[s] * g;
                if v > best[s] + if choice[s].is_none() { tol } else { 0.0 } {
                    best[s] = v;
                    choice[s] = Some((p, sub));
                }
            }
        }
    }
    let mut improved = false;
    for s in 0..n {
        if let Some((p, sub)) = choice[s] {
            table.gamma_to_goal[s] = best[s].clamp(0.0, 1.0);
            table.plan_policy[s] = p;
            table.plan_subgoal[s] = sub;
            improved = true;
        }
    }
    improved
}

/// Shorthand for planning with exactly `k` refinement sweeps at most.
pub fn frp_k(frs: &[OccupancyMatrix], goal: usize, k: usize) -> Result<PlanTable> {
    frp(frs, goal, k + 1, IMPROVEMENT_TOL)
}

/// Runs refinement sweeps until nothing improves.
pub fn frp_converged(frs: &[OccupancyMatrix], goal: usize) -> Result<PlanTable> {
    let n = check_frs(frs)?;
    frp(frs, goal, n + 2, IMPROVEMENT_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub state: usize,
    pub policy: usize,
    pub subgoal: usize,
}

/// An explicit plan: follow `policy` from `state` until `subgoal`, then
/// continue with the next leg.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub start: usize,
    pub goal: usize,
    pub steps: Vec<PlanStep>,
    pub discount: f64,
}

impl Plan {
    /// One `state -> (policy, subgoal)` line per leg, then the plan's
    /// expected discount.
    pub fn render(&self, policy_names: &[&str], state_label: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let name = policy_names
                .get(step.policy)
                .map_or_else(|| format!("pi{}", step.policy), |n| n.to_string());
            out.push_str(&format!(
                "{} -> ({}, {})\n",
                state_label(step.state),
                name,
                state_label(step.subgoal)
            ));
        }
        out.push_str(&format!("discount {} = {}\n", state_label(self.start), self.discount));
        out
    }

    pub fn subgoals(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.subgoal)
    }
}

/// Unrolls a plan table from `s0` by following subgoals to the goal.
pub fn construct_plan(pt: &PlanTable, s0: usize) -> Result<Plan> {
    let n = pt.num_states();
    ensure!(s0 < n, Contract, "start {s0} out of range");
    let mut plan = Plan {
        start: s0,
        goal: pt.goal,
        steps: Vec::new(),
        discount: pt.gamma_to_goal[s0],
    };
    if s0 == pt.goal {
        return Ok(plan);
    }
    if pt.gamma_to_goal[s0] <= 0.0 {
        return Err(Error::NoPlan(format!("goal {} is unreachable from {s0}", pt.goal)));
    }
    let mut visited = vec![false; n];
    let mut s = s0;
    while s != pt.goal {
        visited[s] = true;
        let step = PlanStep {
            state: s,
            policy: pt.plan_policy[s],
            subgoal: pt.plan_subgoal[s],
        };
        plan.steps.push(step);
        if visited[step.subgoal] || plan.steps.len() > n {
            return Err(Error::NoPlan(format!("subgoal cycle through state {}", step.subgoal)));
        }
        s = step.subgoal;
    }
    Ok(plan)
}

/// A rollout: `states` has one more entry than `actions` and `rewards`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last_state(&self) -> usize {
        *self.states.last().expect("trajectory has a start state")
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// Implicit plan execution: in every state follow the table's policy for
/// one step. Stops at the goal or after `max_steps`.
pub fn execute_plan_table<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    pt: &PlanTable,
    policies: &[Policy],
    s0: usize,
    rng: &mut R,
    max_steps: usize,
) -> Result<Trajectory> {
    ensure!(
        pt.num_states() == mdp.num_states(),
        Contract,
        "plan table and MDP differ in size"
    );
    if let Some(&p) = pt.plan_policy.iter().find(|&&p| p >= policies.len()) {
        return Err(Error::Contract(format!("plan uses policy {p}, only {} given", policies.len())));
    }
    mdp.check_state(s0)?;
    let mut traj = Trajectory {
        states: vec![s0],
        ..Default::default()
    };
    let mut s = s0;
    while s != pt.goal && traj.len() < max_steps {
        let a = policies[pt.plan_policy[s]].sample(s, rng);
        let (next, r) = mdp.step(s, a, rng)?;
        traj.actions.push(a);
        traj.rewards.push(r);
        traj.states.push(next);
        s = next;
    }
    Ok(traj)
}
