//! First-occupancy features on continuous MountainCar.
//!
//! The task is reward-free during pre-training. A family of fixed-power
//! policies swings the car between the hills while their successor
//! features (SF) and first-occupancy features (FF) are learned by TD over
//! radial-basis position features. At test time a reward vector is fitted
//! and the set-max policy picks the policy with the best predicted value
//! from the start state.

mod occupancy;
mod regression;

pub use occupancy::{learn_feature_occupancy, FeatureKind, FeatureOccupancy, PretrainConfig, StateGrid};
pub use regression::{fit_reward_weights, goal_reward, smp_select, true_policy_value, RewardWeights};

use crate::error::{ensure, Result};

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const FORCE_SCALE: f64 = 0.0015;
pub const GRAVITY: f64 = 0.0025;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarState {
    pub position: f64,
    pub velocity: f64,
}

impl CarState {
    pub fn new(position: f64, velocity: f64) -> Self {
        CarState { position, velocity }
    }

    /// The test-time start: the valley floor, at rest.
    pub fn start() -> Self {
        CarState::new(-0.5, 0.0)
    }
}

/// One step of the standard continuous MountainCar dynamics. Hitting
/// either end of the track stops the car.
pub fn mountain_car_step(state: CarState, force: f64) -> Result<CarState> {
    ensure!(force.abs() <= 1.0, Contract, "force {force} outside [-1, 1]");
    let mut velocity = state.velocity + FORCE_SCALE * force - GRAVITY * (3.0 * state.position).cos();
    velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
    let mut position = state.position + velocity;
    if position <= MIN_POSITION {
        position = MIN_POSITION;
        velocity = 0.0;
    } else if position >= MAX_POSITION {
        position = MAX_POSITION;
        velocity = 0.0;
    }
    Ok(CarState { position, velocity })
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Accelerates with a constant magnitude: towards the far side when at
/// rest, along the direction of motion otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPowerPolicy {
    pub power: f64,
}

impl FixedPowerPolicy {
    pub fn new(power: f64) -> Result<Self> {
        ensure!(power > 0.0 && power <= 1.0, Contract, "power {power} outside (0, 1]");
        Ok(FixedPowerPolicy { power })
    }

    /// Powers 0.1, 0.2, ..., 0.9.
    pub fn family() -> Vec<FixedPowerPolicy> {
        (1..=9).map(|i| FixedPowerPolicy { power: i as f64 / 10.0 }).collect()
    }
}

pub fn fixed_power_action(pi: &FixedPowerPolicy, state: CarState) -> f64 {
    if state.velocity == 0.0 {
        -sign(state.position) * pi.power
    } else {
        sign(state.velocity) * pi.power
    }
}

/// Gaussian bumps over position with a per-feature occupancy threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBasis {
    pub centers: Vec<f64>,
    pub width: f64,
    pub thresholds: Vec<f64>,
}

impl FeatureBasis {
    pub fn new(centers: Vec<f64>, width: f64, thresholds: Vec<f64>) -> Result<Self> {
        ensure!(!centers.is_empty(), Contract, "a basis needs at least one feature");
        ensure!(width > 0.0, Contract, "width must be positive");
        ensure!(thresholds.len() == centers.len(), Contract, "one threshold per feature");
        ensure!(
            thresholds.iter().all(|&t| t > 0.0 && t <= 1.0),
            Contract,
            "thresholds must lie in (0, 1]"
        );
        Ok(FeatureBasis {
            centers,
            width,
            thresholds,
        })
    }

    /// `dim` centers spread evenly over the track, width half the spacing
    /// (the whole track for a single feature), one shared threshold.
    pub fn uniform(dim: usize, threshold: f64) -> Result<Self> {
        ensure!(dim >= 1, Contract, "a basis needs at least one feature");
        let span = MAX_POSITION - MIN_POSITION;
        let (centers, width) = if dim == 1 {
            (vec![(MIN_POSITION + MAX_POSITION) / 2.0], span / 2.0)
        } else {
            let spacing = span / (dim - 1) as f64;
            ((0..dim).map(|d| MIN_POSITION + spacing * d as f64).collect(), spacing / 2.0)
        };
        FeatureBasis::new(centers, width, vec![threshold; dim])
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// Index of the feature whose center is nearest `position`.
    pub fn nearest(&self, position: f64) -> usize {
        let mut best = 0;
        for (d, c) in self.centers.iter().enumerate() {
            if (c - position).abs() < (self.centers[best] - position).abs() {
                best = d;
            }
        }
        best
    }
}

pub fn rbf_features(basis: &FeatureBasis, state: CarState) -> Vec<f64> {
    let denom = 2.0 * basis.width * basis.width;
    basis
        .centers
        .iter()
        .map(|c| (-(state.position - c).powi(2) / denom).exp())
        .collect()
}
