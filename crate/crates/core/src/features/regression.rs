//! Reward regression, set-max selection and ground-truth rollouts.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure, Result};

use super::occupancy::FeatureOccupancy;
use super::{fixed_power_action, mountain_car_step, CarState, FixedPowerPolicy};

const RIDGE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct RewardWeights {
    pub w: Vec<f64>,
}

impl RewardWeights {
    pub fn predict(&self, features: &[f64]) -> f64 {
        self.w.iter().zip(features).map(|(w, f)| w * f).sum()
    }
}

/// Least squares `min_w sum (r - w.phi)^2` with a small ridge.
pub fn fit_reward_weights(samples: &[(Vec<f64>, f64)]) -> Result<RewardWeights> {
    ensure!(!samples.is_empty(), Contract, "need at least one reward sample");
    let d = samples[0].0.len();
    ensure!(d >= 1, Contract, "feature vectors are empty");
    ensure!(
        samples.iter().all(|(phi, r)| phi.len() == d && r.is_finite() && phi.iter().all(|v| v.is_finite())),
        Contract,
        "samples must share one dimension and be finite"
    );
    let mut gram = DMatrix::<f64>::identity(d, d) * RIDGE;
    let mut rhs = DVector::<f64>::zeros(d);
    for (phi, r) in samples {
        let phi = DVector::from_column_slice(phi);
        gram += &phi * phi.transpose();
        rhs += &phi * *r;
    }
    let w = gram
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| crate::Error::Contract("normal equations are not positive definite".into()))?;
    Ok(RewardWeights { w: w.iter().copied().collect() })
}

/// Unit bump centered on the goal, matching the width of the basis.
pub fn goal_reward(position: f64, goal: f64, width: f64) -> f64 {
    (-(position - goal).powi(2) / (2.0 * width * width)).exp()
}

/// Index of the policy with the highest predicted value `w . rep(start)`,
/// lowest index on ties, and that value.
pub fn smp_select(reps: &[FeatureOccupancy], w: &RewardWeights, start: CarState) -> Result<(usize, f64)> {
    ensure!(!reps.is_empty(), Contract, "set-max selection over an empty policy set");
    let kind = reps[0].kind;
    ensure!(reps.iter().all(|r| r.kind == kind), Contract, "mixed FF and SF representations");
    ensure!(
        reps.iter().all(|r| r.dim() == w.w.len()),
        Contract,
        "reward weights have {} entries, representations differ",
        w.w.len()
    );
    let mut best = (0, f64::NEG_INFINITY);
    for (i, rep) in reps.iter().enumerate() {
        let v = w.predict(rep.at(start));
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// `gamma^T` where `T` is the first step at which the car's position is at
/// or past `goal`, or 0 if that does not happen within `horizon` steps.
pub fn true_policy_value(pi: &FixedPowerPolicy, start: CarState, goal: f64, gamma: f64, horizon: usize) -> Result<f64> {
    ensure!(horizon >= 1, Contract, "horizon must be at least 1");
    ensure!((0.0..=1.0).contains(&gamma), Contract, "gamma {gamma} outside [0, 1]");
    let mut state = start;
    let mut discount = 1.0;
    for _ in 0..=horizon {
        if state.position >= goal {
            return Ok(discount);
        }
        state = mountain_car_step(state, fixed_power_action(pi, state))?;
        discount *= gamma;
    }
    Ok(0.0)
}

#[cfg(test)]
mod tests {
    use super::super::{rbf_features, FeatureBasis, FeatureKind, StateGrid};
    use super::*;

    #[test]
    fn zero_rewards_give_zero_weights() {
        let samples = vec![(vec![0.2, 0.5], 0.0), (vec![1.0, 0.1], 0.0)];
        assert_eq!(fit_reward_weights(&samples).unwrap().w, vec![0.0, 0.0]);
        assert!(fit_reward_weights(&[]).is_err());
    }

    #[test]
    fn exact_feature_reward_recovers_unit_vector() {
        let basis = FeatureBasis::uniform(6, 0.7).unwrap();
        let samples: Vec<_> = (0..200)
            .map(|i| {
                let x = -1.2 + 1.8 * i as f64 / 199.0;
                let phi = rbf_features(&basis, CarState::new(x, 0.0));
                let r = phi[3];
                (phi, r)
            })
            .collect();
        let w = fit_reward_weights(&samples).unwrap().w;
        for (d, v) in w.iter().enumerate() {
            let expected = if d == 3 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-6, "{d}: {v}");
        }
    }

    #[test]
    fn goal_bump_is_reconstructed() {
        let basis = FeatureBasis::uniform(20, 0.7).unwrap();
        let goal = 0.23;
        let states: Vec<_> = (0..400).map(|i| -1.2 + 1.8 * i as f64 / 399.0).collect();
        let samples: Vec<_> = states
            .iter()
            .map(|&x| (rbf_features(&basis, CarState::new(x, 0.0)), goal_reward(x, goal, basis.width)))
            .collect();
        let w = fit_reward_weights(&samples).unwrap();
        let worst = samples
            .iter()
            .map(|(phi, r)| (w.predict(phi) - r).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.1, "{worst}");
        let top = (0..20).max_by(|&a, &b| w.w[a].abs().total_cmp(&w.w[b].abs())).unwrap();
        assert!((basis.centers[top] - goal).abs() <= 1.8 / 19.0);
    }

    #[test]
    fn smp_picks_highest_estimate() {
        let grid = StateGrid {
            position_cells: 1,
            velocity_cells: 1,
        };
        let rep = FeatureOccupancy::zeros(FeatureKind::Ff, 2, grid, 0.9);
        let w = RewardWeights { w: vec![1.0, 0.0] };
        assert_eq!(smp_select(&[rep.clone()], &w, CarState::start()).unwrap(), (0, 0.0));
        let mut better = rep.clone();
        better.td_update_cells(&[1.0, 0.0], &[0.7, 0.7], 0, 0, 0.5).unwrap();
        let (i, v) = smp_select(&[rep.clone(), better, rep.clone()], &w, CarState::start()).unwrap();
        assert_eq!((i, v), (1, 0.5));
        assert!(smp_select(&[], &w, CarState::start()).is_err());
        let sf = FeatureOccupancy::zeros(FeatureKind::Sf, 2, grid, 0.9);
        assert!(smp_select(&[rep, sf], &w, CarState::start()).is_err());
    }

    #[test]
    fn rollout_values() {
        let start = CarState::start();
        let strong = FixedPowerPolicy::new(0.9).unwrap();
        let weak = FixedPowerPolicy::new(0.1).unwrap();
        assert_eq!(true_policy_value(&weak, start, -0.5, 0.99, 10).unwrap(), 1.0);
        assert_eq!(true_policy_value(&weak, start, 0.5, 0.99, 200).unwrap(), 0.0);
        let v = true_policy_value(&strong, start, 0.5, 0.99, 200).unwrap();
        assert!(v > 0.0 && v < 1.0);
        let steps = (v.ln() / 0.99f64.ln()).round() as i32;
        assert!((0.99f64.powi(steps) - v).abs() < 1e-12);
    }
}
