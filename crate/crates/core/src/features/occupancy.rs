//! SF and FF tables over a discretised state space.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{ensure, Error, Result};

use super::{fixed_power_action, mountain_car_step, rbf_features, CarState, FeatureBasis, FixedPowerPolicy};
use super::{MAX_POSITION, MAX_SPEED, MIN_POSITION};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// First-occupancy features: discount at the first time each feature
    /// crosses its threshold.
    Ff,
    /// Successor features: discounted sum of feature activations.
    Sf,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Ff => "FF",
            FeatureKind::Sf => "SF",
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FF" | "ff" => Ok(FeatureKind::Ff),
            "SF" | "sf" => Ok(FeatureKind::Sf),
            other => Err(Error::Parse(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// Uniform `(position, velocity)` grid used to look up continuous states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateGrid {
    pub position_cells: usize,
    pub velocity_cells: usize,
}

impl Default for StateGrid {
    fn default() -> Self {
        StateGrid {
            position_cells: 64,
            velocity_cells: 32,
        }
    }
}

impl StateGrid {
    pub fn num_cells(&self) -> usize {
        self.position_cells * self.velocity_cells
    }

    pub fn cell(&self, state: CarState) -> usize {
        let bin = |x: f64, lo: f64, hi: f64, n: usize| {
            let t = ((x - lo) / (hi - lo) * n as f64).floor();
            (t.max(0.0) as usize).min(n - 1)
        };
        let p = bin(state.position, MIN_POSITION, MAX_POSITION, self.position_cells);
        let v = bin(state.velocity, -MAX_SPEED, MAX_SPEED, self.velocity_cells);
        p * self.velocity_cells + v
    }
}

/// One `dim`-vector per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureOccupancy {
    pub kind: FeatureKind,
    pub gamma: f64,
    pub grid: StateGrid,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureOccupancy {
    pub fn zeros(kind: FeatureKind, dim: usize, grid: StateGrid, gamma: f64) -> Self {
        FeatureOccupancy {
            kind,
            gamma,
            grid,
            dim,
            values: vec![0.0; grid.num_cells() * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_values(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn at(&self, state: CarState) -> &[f64] {
        self.cell_values(self.grid.cell(state))
    }

    /// TD step for the cell of `s_t` given its raw features. FF target per
    /// feature: `1` when `phi_d >= theta_d`, else `gamma * FF(next)_d`.
    /// SF target: `phi_d + gamma * SF(next)_d`. Returns the l2 norm of
    /// the TD error.
    pub fn td_update_cells(
        &mut self,
        features: &[f64],
        thresholds: &[f64],
        cell: usize,
        next_cell: usize,
        alpha: f64,
    ) -> Result<f64> {
        let n = self.grid.num_cells();
        ensure!(cell < n && next_cell < n, Contract, "cell out of range");
        ensure!(
            features.len() == self.dim && thresholds.len() == self.dim,
            Contract,
            "feature vector has {} entries, representation has {}",
            features.len(),
            self.dim
        );
        ensure!(alpha > 0.0 && alpha <= 1.0, Contract, "alpha {alpha} outside (0, 1]");
        let d = self.dim;
        let mut sq = 0.0;
        for k in 0..d {
            let next = self.values[next_cell * d + k];
            let target = match self.kind {
                FeatureKind::Ff if features[k] >= thresholds[k] => 1.0,
                FeatureKind::Ff => self.gamma * next,
                FeatureKind::Sf => features[k] + self.gamma * next,
            };
            let v = &mut self.values[cell * d + k];
            let delta = target - *v;
            *v += alpha * delta;
            sq += delta * delta;
        }
        Ok(sq.sqrt())
    }

    pub fn td_update(&mut self, basis: &FeatureBasis, state: CarState, next: CarState, alpha: f64) -> Result<f64> {
        let phi = rbf_features(basis, state);
        let (cell, next_cell) = (self.grid.cell(state), self.grid.cell(next));
        self.td_update_cells(&phi, &basis.thresholds, cell, next_cell, alpha)
    }

    /// Text cache: a `#` header with kind, dimension, grid shape and
    /// discount, then one comma-separated line per cell.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# kind={} dim={} grid={}x{} gamma={}\n",
            self.kind.as_str(),
            self.dim,
            self.grid.position_cells,
            self.grid.velocity_cells,
            self.gamma
        );
        for cell in 0..self.grid.num_cells() {
            for (k, v) in self.cell_values(cell).iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix('#'))
            .ok_or_else(|| Error::Parse("missing `#` header line".into()))?;
        let (mut kind, mut dim, mut grid, mut gamma) = (None, None, None, None);
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("header {key}: {e}"));
            match key {
                "kind" => kind = Some(value.parse::<FeatureKind>()?),
                "dim" => dim = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
                "gamma" => gamma = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                "grid" => {
                    let (p, v) = value
                        .split_once('x')
                        .ok_or_else(|| Error::Parse(format!("grid `{value}` is not PxV")))?;
                    grid = Some(StateGrid {
                        position_cells: p.parse().map_err(|e| bad(&e))?,
                        velocity_cells: v.parse().map_err(|e| bad(&e))?,
                    });
                }
                _ => return Err(Error::Parse(format!("unknown header field `{key}`"))),
            }
        }
        let missing = |what: &str| Error::Parse(format!("header is missing `{what}`"));
        let mut rep = FeatureOccupancy::zeros(
            kind.ok_or_else(|| missing("kind"))?,
            dim.ok_or_else(|| missing("dim"))?,
            grid.ok_or_else(|| missing("grid"))?,
            gamma.ok_or_else(|| missing("gamma"))?,
        );
        let mut cell = 0;
        for line in lines {
            ensure!(cell < rep.grid.num_cells(), Parse, "more rows than grid cells");
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {cell}: {e}")))?;
            ensure!(row.len() == rep.dim, Parse, "row {cell} has {} values, expected {}", row.len(), rep.dim);
            let d = rep.dim;
            rep.values[cell * d..(cell + 1) * d].copy_from_slice(&row);
            cell += 1;
        }
        ensure!(cell == rep.grid.num_cells(), Parse, "{cell} rows, expected {}", rep.grid.num_cells());
        Ok(rep)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PretrainConfig {
    pub episodes: usize,
    pub steps: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Episodes start at rest at a uniform position in this range.
    pub start_range: (f64, f64),
    /// Apply each episode's TD updates last transition first, so an
    /// arrival propagates back along the whole episode in one pass.
    pub reverse_replay: bool,
    /// Passes of TD over the collected episodes. One pass is plain online
    /// learning; more passes drive the table toward the TD fixed point of
    /// the pre-training data.
    pub epochs: usize,
    pub grid: StateGrid,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            episodes: 100,
            steps: 200,
            alpha: 0.1,
            gamma: 0.99,
            start_range: (-0.6, -0.4),
            reverse_replay: true,
            epochs: 100,
            grid: StateGrid::default(),
        }
    }
}

/// Learns the SF or FF of `policy` in the reward-free task. Returns the
/// table and the mean TD-error norm of every episode replay, in order.
pub fn learn_feature_occupancy<R: Rng + ?Sized>(
    kind: FeatureKind,
    basis: &FeatureBasis,
    policy: &FixedPowerPolicy,
    cfg: &PretrainConfig,
    rng: &mut R,
) -> Result<(FeatureOccupancy, Vec<f64>)> {
    ensure!(
        cfg.episodes >= 1 && cfg.steps >= 1 && cfg.epochs >= 1,
        Contract,
        "episodes, steps and epochs must be positive"
    );
    ensure!(cfg.start_range.0 <= cfg.start_range.1, Contract, "empty start range");
    let mut episodes = Vec::with_capacity(cfg.episodes);
    for _ in 0..cfg.episodes {
        let x = if cfg.start_range.0 == cfg.start_range.1 {
            cfg.start_range.0
        } else {
            rng.gen_range(cfg.start_range.0..cfg.start_range.1)
        };
        let mut state = CarState::new(x, 0.0);
        let mut episode = Vec::with_capacity(cfg.steps);
        for _ in 0..cfg.steps {
            let next = mountain_car_step(state, fixed_power_action(policy, state))?;
            let phi = rbf_features(basis, state);
            episode.push((phi, cfg.grid.cell(state), cfg.grid.cell(next)));
            state = next;
        }
        if cfg.reverse_replay {
            episode.reverse();
        }
        episodes.push(episode);
    }

    let mut rep = FeatureOccupancy::zeros(kind, basis.dim(), cfg.grid, cfg.gamma);
    let mut curve = Vec::with_capacity(cfg.episodes * cfg.epochs);
    for _ in 0..cfg.epochs {
        for episode in &episodes {
            let mut total = 0.0;
            for (phi, cell, next) in episode {
                total += rep.td_update_cells(phi, &basis.thresholds, *cell, *next, cfg.alpha)?;
            }
            curve.push(total / cfg.steps as f64);
        }
    }
    Ok((rep, curve))
}
