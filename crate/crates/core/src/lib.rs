//! First-occupancy representations and the planners built on them.
//!
//! * [`mdp`]: finite MDPs, policies, grid and exploration environments.
//! * [`occupancy`]: FR and SR matrices, their fixed points, TD learning and
//!   policy evaluation.
//! * [`planner`]: FR planning, explicit plans, multi-goal ordering and the
//!   value-iteration baseline.
//! * [`exploration`]: Sarsa with occupancy-norm exploration bonuses.
//! * [`features`]: continuous MountainCar with first-occupancy features and
//!   successor features.

pub mod error;
pub mod exploration;
pub mod features;
pub mod mdp;
pub mod occupancy;
pub mod planner;

pub use error::{Error, Result};
