//! Value iteration with a known model.

use crate::error::{ensure, Error, Result};
use crate::mdp::{Policy, TabularMdp};

#[derive(Clone, Debug)]
pub struct ViResult {
    pub values: Vec<f64>,
    /// Greedy with respect to `values`, lowest action on ties.
    pub policy: Policy,
    pub iterations: usize,
    pub converged: bool,
}

/// Sparse `(next, p, reward)` lists per `(s, a)`.
fn sparse_model(mdp: &TabularMdp) -> Vec<Vec<(usize, f64, f64)>> {
    let (n, m) = (mdp.num_states(), mdp.num_actions());
    let mut out = Vec::with_capacity(n * m);
    for s in 0..n {
        for a in 0..m {
            out.push(
                mdp.row(s, a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(next, &p)| (next, p, mdp.transition_reward(s, a, next)))
                    .collect(),
            );
        }
    }
    out
}

fn backup(model: &[(usize, f64, f64)], values: &[f64], gamma: f64) -> f64 {
    model.iter().map(|&(next, p, r)| p * (r + gamma * values[next])).sum()
}

/// Synchronous value iteration from `V = 0`. Stops when the largest change
/// in a sweep is below `tol`, or after `max_iters` sweeps. Terminal states
/// keep value zero. Pass a small `max_iters` for truncated VI.
pub fn value_iteration(mdp: &TabularMdp, tol: f64, max_iters: usize) -> Result<ViResult> {
    ensure!(tol > 0.0, Contract, "tolerance must be positive");
    let (n, m) = (mdp.num_states(), mdp.num_actions());
    let gamma = mdp.gamma();
    let model = sparse_model(mdp);
    let mut values = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let mut next = vec![0.0; n];
        let mut change: f64 = 0.0;
        for s in 0..n {
            if mdp.is_terminal(s) {
                continue;
            }
            let best = (0..m)
                .map(|a| backup(&model[s * m + a], &values, gamma))
                .fold(f64::NEG_INFINITY, f64::max);
            change = change.max((best - values[s]).abs());
            next[s] = best;
        }
        values = next;
        iterations += 1;
        if change < tol {
            converged = true;
            break;
        }
    }

    let policy = (0..n)
        .map(|s| {
            let mut best = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..m {
                let q = backup(&model[s * m + a], &values, gamma);
                if q > best_q {
                    best_q = q;
                    best = a;
                }
            }
            best
        })
        .collect();
    Ok(ViResult {
        values,
        policy: Policy::Deterministic(policy),
        iterations,
        converged,
    })
}

/// Sweeps sufficient for an `epsilon`-optimal greedy policy:
/// `ceil(1 / (1 - gamma) * ln(2 / ((1 - gamma)^2 epsilon)))`, floored at 0.
pub fn vi_iteration_bound(gamma: f64, epsilon: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Contract(format!("gamma {gamma} outside [0, 1)")));
    }
    ensure!(epsilon > 0.0, Contract, "epsilon must be positive");
    let horizon = 1.0 / (1.0 - gamma);
    let bound = horizon * (2.0 / ((1.0 - gamma).powi(2) * epsilon)).ln();
    Ok(bound.ceil().max(0.0) as u64)
}
