//! RiverSwim and SixArms, loaded from the parameter tables in `fixtures/`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use crate::error::{ensure, Error, Result};

use super::TabularMdp;

const RIVERSWIM: &str = include_str!("../../fixtures/riverswim.toml");
const SIXARMS: &str = include_str!("../../fixtures/sixarms.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationEnvFile {
    pub name: String,
    pub states: usize,
    pub actions: usize,
    #[serde(default)]
    pub action_names: Vec<String>,
    pub gamma: f64,
    pub initial: Vec<InitialMass>,
    pub transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialMass {
    pub s: usize,
    pub p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub s: usize,
    pub a: usize,
    pub next: usize,
    pub p: f64,
    pub r: f64,
}

impl ExplorationEnvFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_mdp(&self) -> Result<TabularMdp> {
        let (n, m) = (self.states, self.actions);
        let mut transition = vec![0.0; n * m * n];
        let mut reward = vec![0.0; n * m * n];
        for e in &self.transitions {
            ensure!(
                e.s < n && e.a < m && e.next < n,
                InvalidSpec,
                "{}: transition ({}, {}, {}) out of range",
                self.name,
                e.s,
                e.a,
                e.next
            );
            let idx = (e.s * m + e.a) * n + e.next;
            ensure!(
                transition[idx] == 0.0,
                InvalidSpec,
                "{}: duplicate transition ({}, {}, {})",
                self.name,
                e.s,
                e.a,
                e.next
            );
            transition[idx] = e.p;
            reward[idx] = e.r;
        }
        let mut initial = vec![0.0; n];
        for mass in &self.initial {
            ensure!(mass.s < n, InvalidSpec, "{}: initial state {} out of range", self.name, mass.s);
            initial[mass.s] += mass.p;
        }
        TabularMdp::new(n, m, transition, vec![0.0; n], self.gamma, initial, BTreeSet::new())?
            .with_transition_reward(reward)
    }
}

/// Builds one of the bundled exploration tasks by name.
pub fn build_exploration_env(name: &str) -> Result<TabularMdp> {
    let text = match name {
        "riverswim" => RIVERSWIM,
        "sixarms" => SIXARMS,
        other => return Err(Error::InvalidSpec(format!("unknown exploration env `{other}`"))),
    };
    ExplorationEnvFile::parse(text)?.to_mdp()
}

pub fn load_exploration_env(path: impl AsRef<Path>) -> Result<TabularMdp> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExplorationEnvFile::parse(&text)?.to_mdp()
}
