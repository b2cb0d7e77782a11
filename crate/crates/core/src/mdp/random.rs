//! Random MDP generators for property tests.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::Result;

use super::TabularMdp;

/// Transition rows drawn from a flat Dirichlet, rewards uniform in
/// `[-1, 1]`, uniform initial distribution.
pub fn random_mdp<R: Rng + ?Sized>(
    num_states: usize,
    num_actions: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<TabularMdp> {
    let n = num_states.max(1);
    let m = num_actions.max(1);
    let mut transition = Vec::with_capacity(n * m * n);
    for _ in 0..n * m {
        // Exponential spacings normalise to a uniform draw from the simplex.
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let mut row: Vec<f64> = raw.iter().map(|x| x / total).collect();
        // Pin the row sum to one exactly.
        let tail: f64 = row[..n - 1].iter().sum();
        row[n - 1] = (1.0 - tail).max(0.0);
        transition.extend(row);
    }
    let reward = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let initial = vec![1.0 / n as f64; n];
    TabularMdp::new(n, m, transition, reward, gamma, initial, BTreeSet::new())
}

/// Every `(s, a)` moves to a uniformly chosen successor with probability 1.
pub fn random_deterministic_mdp<R: Rng + ?Sized>(
    num_states: usize,
    num_actions: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<TabularMdp> {
    let n = num_states.max(1);
    let m = num_actions.max(1);
    let mut transition = vec![0.0; n * m * n];
    for sa in 0..n * m {
        transition[sa * n + rng.gen_range(0..n)] = 1.0;
    }
    let reward = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let initial = vec![1.0 / n as f64; n];
    TabularMdp::new(n, m, transition, reward, gamma, initial, BTreeSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_state_is_absorbing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mdp = random_mdp(1, 1, 0.9, &mut rng).unwrap();
        assert_eq!(mdp.prob(0, 0, 0), 1.0);
    }

    #[test]
    fn same_seed_same_mdp() {
        let a = random_mdp(5, 3, 0.9, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = random_mdp(5, 3, 0.9, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        for s in 0..5 {
            for act in 0..3 {
                assert_eq!(a.row(s, act), b.row(s, act));
            }
        }
        assert_eq!(a.reward(), b.reward());
    }

    #[test]
    fn rows_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mdp = random_mdp(8, 2, 0.5, &mut rng).unwrap();
            for s in 0..8 {
                for a in 0..2 {
                    assert!((mdp.row(s, a).iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
            assert!(mdp.reward().iter().all(|r| (-1.0..=1.0).contains(r)));
        }
    }
}
