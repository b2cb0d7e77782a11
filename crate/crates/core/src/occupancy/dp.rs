//! Dynamic-programming fixed points and the exact first-passage oracle.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure, Error, Result};
use crate::mdp::{Policy, TabularMdp};

use super::{OccupancyMatrix, RepKind};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Above this many states the SR is solved by iteration instead of LU.
const DIRECT_SOLVE_LIMIT: usize = 2000;

/// One application of the FR Bellman operator:
/// `I + gamma (11^T - I) o (P F)`.
pub fn fr_bellman_apply(f: &DMatrix<f64>, p: &DMatrix<f64>, gamma: f64) -> Result<DMatrix<f64>> {
    let n = p.nrows();
    ensure!(p.ncols() == n, Contract, "transition matrix is {}x{}", n, p.ncols());
    ensure!(
        f.nrows() == n && f.ncols() == n,
        Contract,
        "FR is {}x{}, transition matrix is {n}x{n}",
        f.nrows(),
        f.ncols()
    );
    let mut out = p * f;
    out *= gamma;
    out.fill_diagonal(1.0);
    Ok(out)
}

/// `k` operator applications starting from the identity.
pub fn fr_iterate(p: &DMatrix<f64>, gamma: f64, k: usize) -> Result<DMatrix<f64>> {
    let mut f = DMatrix::identity(p.nrows(), p.nrows());
    for _ in 0..k {
        f = fr_bellman_apply(&f, p, gamma)?;
    }
    Ok(f)
}

fn iteration_cap(gamma: f64, tol: f64) -> usize {
    if gamma == 0.0 {
        return 2;
    }
    (tol.ln() / gamma.ln()).ceil().max(1.0) as usize + 2
}

/// State-indexed FR of `pi` by repeated operator application from `I`,
/// stopping once the largest change drops below `tol`.
pub fn fr_dp(mdp: &TabularMdp, pi: &Policy, tol: f64) -> Result<OccupancyMatrix> {
    ensure!(tol > 0.0, Contract, "tolerance must be positive");
    let p = mdp.policy_matrix(pi)?;
    let gamma = mdp.gamma();
    let mut f = DMatrix::identity(p.nrows(), p.nrows());
    for _ in 0..iteration_cap(gamma, tol) {
        let next = fr_bellman_apply(&f, &p, gamma)?;
        let change = (&next - &f).abs().max();
        f = next;
        if change < tol {
            break;
        }
    }
    OccupancyMatrix::from_values(RepKind::Fr, gamma, None, f)
}

/// Action-conditioned FR:
/// `F(s, a, t) = 1(s = t) + gamma 1(s != t) sum_s' p(s'|s, a) F(s', t)`.
pub fn fr_dp_action(mdp: &TabularMdp, pi: &Policy, tol: f64) -> Result<OccupancyMatrix> {
    let state_fr = fr_dp(mdp, pi, tol)?;
    let values = condition_on_actions(mdp, state_fr.values(), |s, t, v| if s == t { 1.0 } else { v });
    OccupancyMatrix::from_values(RepKind::Fr, mdp.gamma(), Some(mdp.num_actions()), values)
}

/// SR `(I - gamma P)^-1`, by LU for small state spaces and by iteration
/// otherwise.
pub fn sr_dp(mdp: &TabularMdp, pi: &Policy, tol: f64) -> Result<OccupancyMatrix> {
    ensure!(tol > 0.0, Contract, "tolerance must be positive");
    let p = mdp.policy_matrix(pi)?;
    let n = p.nrows();
    let gamma = mdp.gamma();
    let identity = DMatrix::<f64>::identity(n, n);
    let m = if n <= DIRECT_SOLVE_LIMIT {
        let a = &identity - &p * gamma;
        a.lu()
            .solve(&identity)
            .ok_or_else(|| Error::Contract("I - gamma P is singular".into()))?
    } else {
        let mut m = identity.clone();
        for _ in 0..iteration_cap(gamma, tol * (1.0 - gamma)) {
            let next = &identity + (&p * &m) * gamma;
            let change = (&next - &m).abs().max();
            m = next;
            if change < tol * (1.0 - gamma) {
                break;
            }
        }
        m
    };
    OccupancyMatrix::from_values(RepKind::Sr, gamma, None, m)
}

/// Action-conditioned SR: `M(s, a, .) = e_s + gamma sum_s' p(s'|s, a) M(s', .)`.
pub fn sr_dp_action(mdp: &TabularMdp, pi: &Policy, tol: f64) -> Result<OccupancyMatrix> {
    let state_sr = sr_dp(mdp, pi, tol)?;
    let values = condition_on_actions(mdp, state_sr.values(), |s, t, v| if s == t { 1.0 + v } else { v });
    OccupancyMatrix::from_values(RepKind::Sr, mdp.gamma(), Some(mdp.num_actions()), values)
}

/// Builds `(s, a)` rows from `gamma * sum_s' p(s'|s, a) rep(s', t)`, then
/// lets `finish(s, t, value)` apply the indicator term.
fn condition_on_actions(
    mdp: &TabularMdp,
    state_rep: &DMatrix<f64>,
    finish: impl Fn(usize, usize, f64) -> f64,
) -> DMatrix<f64> {
    let (n, m) = (mdp.num_states(), mdp.num_actions());
    let gamma = mdp.gamma();
    let mut out = DMatrix::zeros(n * m, n);
    for s in 0..n {
        for a in 0..m {
            let row = s * m + a;
            for (next, &p) in mdp.row(s, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for t in 0..n {
                    out[(row, t)] += gamma * p * state_rep[(next, t)];
                }
            }
            for t in 0..n {
                out[(row, t)] = finish(s, t, out[(row, t)]);
            }
        }
    }
    out
}

/// `E[gamma^T]` for every start state, where `T` is the first hitting time
/// of `target` under `pi` (zero when it is never hit). Solved exactly by
/// clamping the target row and solving `(I - gamma P') x = e_target`.
pub fn first_passage_column(mdp: &TabularMdp, pi: &Policy, target: usize) -> Result<Vec<f64>> {
    mdp.check_state(target)?;
    let mut p = mdp.policy_matrix(pi)?;
    let n = p.nrows();
    p.row_mut(target).fill(0.0);
    let a = DMatrix::<f64>::identity(n, n) - p * mdp.gamma();
    let mut b = DVector::zeros(n);
    b[target] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Contract("first-passage system is singular".into()))?;
    Ok(x.iter().copied().collect())
}

pub fn first_passage_oracle(mdp: &TabularMdp, pi: &Policy, s: usize, target: usize) -> Result<f64> {
    mdp.check_state(s)?;
    Ok(first_passage_column(mdp, pi, target)?[s])
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::mdp::{one_action_policy, random_mdp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// 0 -> 1 -> 2 -> 0 with a single action.
    fn ring(gamma: f64) -> TabularMdp {
        let t = vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        TabularMdp::new(3, 1, t, vec![0.0; 3], gamma, vec![1.0, 0.0, 0.0], BTreeSet::new()).unwrap()
    }

    #[test]
    fn operator_forces_unit_diagonal() {
        let p = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.6, 0.4]);
        let f = DMatrix::from_row_slice(2, 2, &[5.0, -3.0, 2.0, 9.0]);
        let g = fr_bellman_apply(&f, &p, 0.9).unwrap();
        assert_eq!((g[(0, 0)], g[(1, 1)]), (1.0, 1.0));
        assert!(fr_bellman_apply(&f, &DMatrix::zeros(3, 3), 0.9).is_err());
    }

    #[test]
    fn ring_two_applications() {
        let mdp = ring(0.5);
        let p = mdp.policy_matrix(&one_action_policy(&mdp, 0).unwrap()).unwrap();
        let f = fr_iterate(&p, 0.5, 2).unwrap();
        assert_eq!(f[(0, 2)], 0.25);
        assert_eq!(f[(0, 1)], 0.5);
    }

    #[test]
    fn ring_fixed_point() {
        let mdp = ring(0.5);
        let pi = one_action_policy(&mdp, 0).unwrap();
        let f = fr_dp(&mdp, &pi, DEFAULT_TOL).unwrap();
        assert_eq!((f.get(0, 0), f.get(0, 1), f.get(0, 2)), (1.0, 0.5, 0.25));
        assert_eq!(first_passage_oracle(&mdp, &pi, 0, 2).unwrap(), 0.25);
    }

    #[test]
    fn ring_sr() {
        let mdp = ring(0.5);
        let pi = one_action_policy(&mdp, 0).unwrap();
        let m = sr_dp(&mdp, &pi, DEFAULT_TOL).unwrap();
        assert!((m.get(0, 0) - 8.0 / 7.0).abs() < 1e-12);
        for s in 0..3 {
            let total: f64 = m.row_vec(s).iter().sum();
            assert!((total - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sr_with_zero_discount_is_identity() {
        let mdp = ring(0.0);
        let pi = one_action_policy(&mdp, 0).unwrap();
        let m = sr_dp(&mdp, &pi, DEFAULT_TOL).unwrap();
        assert_eq!(m.values(), &DMatrix::identity(3, 3));
        let f = fr_dp(&mdp, &pi, DEFAULT_TOL).unwrap();
        assert_eq!(f.values(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn absorbing_state_reaches_nothing() {
        // state 1 absorbs
        let t = vec![0.0, 1.0, 0.0, 1.0];
        let mdp = TabularMdp::new(2, 1, t, vec![0.0; 2], 0.9, vec![1.0, 0.0], [1].into()).unwrap();
        let pi = one_action_policy(&mdp, 0).unwrap();
        let f = fr_dp(&mdp, &pi, DEFAULT_TOL).unwrap();
        assert_eq!(f.get(1, 0), 0.0);
        assert_eq!(first_passage_oracle(&mdp, &pi, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn random_mdp_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mdp = random_mdp(8, 3, 0.9, &mut rng).unwrap();
        let pi = Policy::uniform(8, 3);
        let f = fr_dp(&mdp, &pi, 1e-12).unwrap();
        for t in 0..8 {
            let col = first_passage_column(&mdp, &pi, t).unwrap();
            for s in 0..8 {
                assert!((f.get(s, t) - col[s]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn action_conditioned_reduces_on_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mdp = random_mdp(6, 3, 0.8, &mut rng).unwrap();
        let pi = Policy::Deterministic(vec![0, 1, 2, 0, 1, 2]);
        let f = fr_dp(&mdp, &pi, 1e-12).unwrap();
        let fa = fr_dp_action(&mdp, &pi, 1e-12).unwrap();
        let m = sr_dp(&mdp, &pi, 1e-12).unwrap();
        let ma = sr_dp_action(&mdp, &pi, 1e-12).unwrap();
        for s in 0..6 {
            let a = pi.deterministic_action(s).unwrap();
            for t in 0..6 {
                assert!((fa.get_action(s, a, t) - f.get(s, t)).abs() < 1e-9);
                assert!((ma.get_action(s, a, t) - m.get(s, t)).abs() < 1e-9);
            }
        }
    }
}
