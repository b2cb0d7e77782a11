//! Exact shortest plan length on deterministic MDPs.

use std::collections::VecDeque;

use crate::error::{ensure, Result};
use crate::mdp::{Policy, TabularMdp};

/// Fewest steps from `s0` to `goal` when any base policy may be chosen in
/// any state. Requires deterministic dynamics and policies. `None` when
/// the goal is unreachable.
pub fn shortest_path_oracle(
    mdp: &TabularMdp,
    policies: &[Policy],
    s0: usize,
    goal: usize,
) -> Result<Option<usize>> {
    ensure!(mdp.is_deterministic(), Contract, "shortest-path oracle needs deterministic dynamics");
    mdp.check_state(s0)?;
    mdp.check_state(goal)?;
    let n = mdp.num_states();
    let mut moves: Vec<Vec<usize>> = vec![Vec::new(); n];
    for pi in policies {
        pi.validate(n, mdp.num_actions())?;
        for (s, out) in moves.iter_mut().enumerate() {
            let a = pi.deterministic_action(s);
            ensure!(a.is_some(), Contract, "shortest-path oracle needs deterministic policies");
            let next = mdp.successor(s, a.unwrap()).expect("deterministic row");
            if !out.contains(&next) {
                out.push(next);
            }
        }
    }

    let mut dist = vec![usize::MAX; n];
    dist[s0] = 0;
    let mut queue = VecDeque::from([s0]);
    while let Some(s) = queue.pop_front() {
        if s == goal {
            return Ok(Some(dist[s]));
        }
        for &next in &moves[s] {
            if dist[next] == usize::MAX {
                dist[next] = dist[s] + 1;
                queue.push_back(next);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{one_action_policy, ActionSet, Cell, GridSpec};

    #[test]
    fn open_grid_manhattan() {
        let spec = GridSpec::open(4, 3, ActionSet::FourConnected);
        let world = crate::mdp::build_gridworld(&spec, &[Cell { row: 2, col: 3 }], 0.9).unwrap();
        let pols: Vec<_> = (0..4).map(|a| one_action_policy(world.mdp(), a).unwrap()).collect();
        let s0 = world.state(Cell { row: 0, col: 0 }).unwrap();
        let g = world.goals()[0];
        assert_eq!(shortest_path_oracle(world.mdp(), &pols, s0, g).unwrap(), Some(5));
        assert_eq!(shortest_path_oracle(world.mdp(), &pols[..1], s0, g).unwrap(), None);
    }
}
