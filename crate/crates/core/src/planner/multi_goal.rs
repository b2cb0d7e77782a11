//! Ordering several goals by exhaustive search over FR-planned discounts.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{ensure, Error, Result};
use crate::occupancy::OccupancyMatrix;

use super::frp_converged;

pub const MAX_ORDERED_GOALS: usize = 10;

/// Planned discount from every state to every goal: entry `(s, j)` is the
/// converged plan value from `s` to `goals[j]`.
#[derive(Clone, Debug)]
pub struct GoalDiscountMatrix {
    pub goals: Vec<usize>,
    pub values: DMatrix<f64>,
}

impl GoalDiscountMatrix {
    pub fn discount(&self, from: usize, goal_index: usize) -> f64 {
        self.values[(from, goal_index)]
    }
}

pub fn multi_goal_discounts(frs: &[OccupancyMatrix], goals: &[usize]) -> Result<GoalDiscountMatrix> {
    ensure!(!goals.is_empty(), Contract, "no goals given");
    ensure!(!frs.is_empty(), Contract, "planning needs at least one base policy");
    let n = frs[0].num_states();
    let mut values = DMatrix::zeros(n, goals.len());
    for (j, &g) in goals.iter().enumerate() {
        let table = frp_converged(frs, g)?;
        for s in 0..n {
            values[(s, j)] = table.gamma_to_goal[s];
        }
    }
    Ok(GoalDiscountMatrix {
        goals: goals.to_vec(),
        values,
    })
}

/// The visiting order of all goals that maximises the product of leg
/// discounts starting from `s0`. Returns the goal states in order and the
/// product. Ties go to the lexicographically smallest order of goal
/// indices.
pub fn optimal_goal_ordering(gd: &GoalDiscountMatrix, s0: usize) -> Result<(Vec<usize>, f64)> {
    let count = gd.goals.len();
    if count > MAX_ORDERED_GOALS {
        return Err(Error::TooManyGoals {
            count,
            limit: MAX_ORDERED_GOALS,
        });
    }
    ensure!(count > 0, Contract, "no goals given");
    ensure!(s0 < gd.values.nrows(), Contract, "start {s0} out of range");
    let mut best: Option<(Vec<usize>, f64)> = None;
    for order in (0..count).permutations(count) {
        let mut from = s0;
        let mut total = 1.0;
        for &j in &order {
            total *= gd.discount(from, j);
            from = gd.goals[j];
        }
        if best.as_ref().map_or(true, |(_, b)| total > *b) {
            best = Some((order, total));
        }
    }
    let (order, total) = best.expect("at least one permutation");
    Ok((order.into_iter().map(|j| gd.goals[j]).collect(), total))
}
