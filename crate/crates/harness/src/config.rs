//! Experiment selection and dotted-key parameter overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Fig1Demo,
    Fig3Planning,
    FourRooms,
    FourRoomsNoise,
    Exploration,
    MountainCarFf,
    MountainCarDims,
    Escape,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig1Demo,
        Experiment::Fig3Planning,
        Experiment::FourRooms,
        Experiment::FourRoomsNoise,
        Experiment::Exploration,
        Experiment::MountainCarFf,
        Experiment::MountainCarDims,
        Experiment::Escape,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1Demo => "fig1-demo",
            Experiment::Fig3Planning => "fig3-planning",
            Experiment::FourRooms => "fourrooms",
            Experiment::FourRoomsNoise => "fourrooms-noise",
            Experiment::Exploration => "exploration",
            Experiment::MountainCarFf => "mountaincar-ff",
            Experiment::MountainCarDims => "mountaincar-dims",
            Experiment::Escape => "escape",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                HarnessError::Usage(format!("unknown experiment `{s}` (known: {})", known.join(", ")))
            })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Raw `key=value` overrides, keyed by the full dotted path.
    pub overrides: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            seed,
            out_dir: out_dir.into(),
            overrides: BTreeMap::new(),
        }
    }

    /// Parses `key=value`; later duplicates win.
    pub fn with_override(mut self, assignment: &str) -> Result<Self> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(HarnessError::Usage(format!("override `{assignment}` has an empty key")));
        }
        self.overrides.insert(key.to_string(), value.trim().to_string());
        Ok(self)
    }

    /// Experiment parameters: defaults with this config's overrides applied.
    pub fn params<P: Serialize + DeserializeOwned + Default>(&self) -> Result<P> {
        apply_overrides(P::default(), self.experiment.name(), &self.overrides)
    }
}

/// Applies `section.field[.sub]=value` overrides to `params` through its
/// TOML form. Keys outside `section`, unknown fields and type mismatches
/// are usage errors.
pub fn apply_overrides<P: Serialize + DeserializeOwned>(
    params: P,
    section: &str,
    overrides: &BTreeMap<String, String>,
) -> Result<P> {
    let mut root = toml::Table::try_from(&params)
        .map_err(|e| HarnessError::Report(format!("cannot serialise parameters: {e}")))?;
    for (key, raw) in overrides {
        let path = key
            .strip_prefix(section)
            .and_then(|rest| rest.strip_prefix('.'))
            .ok_or_else(|| HarnessError::Usage(format!("override `{key}` does not belong to `{section}`")))?;
        let parts: Vec<&str> = path.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields at least one part");
        let mut table = &mut root;
        for part in parents {
            table = table
                .get_mut(*part)
                .and_then(toml::Value::as_table_mut)
                .ok_or_else(|| HarnessError::Usage(format!("unknown parameter `{key}`")))?;
        }
        let current = table
            .get(*last)
            .ok_or_else(|| HarnessError::Usage(format!("unknown parameter `{key}`")))?;
        let value = coerce(parse_value(raw), current)
            .ok_or_else(|| HarnessError::Usage(format!("`{key}` expects a {}, got `{raw}`", current.type_str())))?;
        table.insert((*last).to_string(), value);
    }
    root.try_into()
        .map_err(|e| HarnessError::Usage(format!("invalid parameters for `{section}`: {e}")))
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Accepts the new value when it has the type of the one it replaces;
/// integers widen to floats.
fn coerce(value: toml::Value, current: &toml::Value) -> Option<toml::Value> {
    use toml::Value as V;
    match (value, current) {
        (V::Integer(i), V::Float(_)) => Some(V::Float(i as f64)),
        (v @ V::Array(_), V::Array(_)) => Some(v),
        (v, c) if v.same_type(c) => Some(v),
        (v, V::String(_)) => Some(V::String(v.to_string())),
        _ => None,
    }
}
