//! Fixed-power MountainCar policies: set-max selection with FF versus SF,
//! and the effect of the feature dimension on the selected power.

use std::path::PathBuf;

use firstocc_core::features::{
    fit_reward_weights, goal_reward, learn_feature_occupancy, mountain_car_step, rbf_features, smp_select,
    true_policy_value, CarState, FeatureBasis, FeatureKind, FeatureOccupancy, FixedPowerPolicy, PretrainConfig,
    StateGrid, MAX_POSITION, MAX_SPEED, MIN_POSITION,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{mean_std, summarize, Report, Series, Table};
use crate::seeds::trial_rng;

const KINDS: [FeatureKind; 2] = [FeatureKind::Ff, FeatureKind::Sf];
const GOAL_ARM: u32 = 1 << 20;

/// Reward-free pre-training of each policy's FF and SF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PretrainParams {
    pub episodes: usize,
    pub steps: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epochs: usize,
    pub reverse_replay: bool,
    pub position_cells: usize,
    pub velocity_cells: usize,
}

impl Default for PretrainParams {
    fn default() -> Self {
        let d = PretrainConfig::default();
        PretrainParams {
            episodes: d.episodes,
            steps: d.steps,
            alpha: d.alpha,
            gamma: d.gamma,
            epochs: d.epochs,
            reverse_replay: d.reverse_replay,
            position_cells: d.grid.position_cells,
            velocity_cells: d.grid.velocity_cells,
        }
    }
}

impl PretrainParams {
    fn to_config(&self) -> Result<PretrainConfig> {
        if self.episodes == 0 || self.steps == 0 || self.epochs == 0 || self.position_cells == 0 || self.velocity_cells == 0 {
            return Err(HarnessError::Usage("pre-training counts must be at least 1".into()));
        }
        Ok(PretrainConfig {
            episodes: self.episodes,
            steps: self.steps,
            alpha: self.alpha,
            gamma: self.gamma,
            epochs: self.epochs,
            reverse_replay: self.reverse_replay,
            grid: StateGrid {
                position_cells: self.position_cells,
                velocity_cells: self.velocity_cells,
            },
            ..Default::default()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionParams {
    pub seeds: usize,
    pub goals_per_seed: usize,
    pub dim: usize,
    pub threshold: f64,
    pub goal_min: f64,
    pub goal_max: f64,
    pub horizon: usize,
    pub regression_rollouts: usize,
    pub regression_steps: usize,
    /// Directory for learned tables; reused when a matching file exists.
    /// Empty disables caching.
    pub cache_dir: String,
    pub pretrain: PretrainParams,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            seeds: 20,
            goals_per_seed: 10,
            dim: 20,
            threshold: 0.7,
            goal_min: 0.0,
            goal_max: 0.5,
            horizon: 200,
            regression_rollouts: 50,
            regression_steps: 20,
            cache_dir: String::new(),
            pretrain: PretrainParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsParams {
    pub dims: Vec<usize>,
    pub seeds: usize,
    pub goals: Vec<f64>,
    pub threshold: f64,
    pub horizon: usize,
    pub cache_dir: String,
    pub pretrain: PretrainParams,
}

impl Default for DimsParams {
    fn default() -> Self {
        DimsParams {
            dims: vec![5, 10, 20, 40, 80],
            seeds: 3,
            goals: (0..9).map(|i| (-3 + i) as f64 / 10.0).collect(),
            threshold: 0.7,
            horizon: 200,
            cache_dir: String::new(),
            pretrain: PretrainParams::default(),
        }
    }
}

/// Learned tables for every policy of the family, indexed `[kind][policy]`,
/// plus their TD curves.
struct Learned {
    reps: Vec<Vec<FeatureOccupancy>>,
    curves: Vec<Vec<Vec<f64>>>,
}

fn cache_path(dir: &str, root: u64, seed: usize, kind: FeatureKind, dim: usize, policy: usize) -> Option<PathBuf> {
    (!dir.is_empty()).then(|| PathBuf::from(dir).join(format!("{}_d{dim}_p{policy}_root{root}_seed{seed}.txt", kind.as_str())))
}

/// Learns (or loads) the FF and SF of every fixed-power policy for one seed.
/// Each (kind, policy) table draws its start states from its own stream.
fn learn_family(basis: &FeatureBasis, cfg: &PretrainConfig, root: u64, seed: usize, cache_dir: &str) -> Result<Learned> {
    let family = FixedPowerPolicy::family();
    let jobs: Vec<(usize, usize)> = (0..KINDS.len()).flat_map(|k| (0..family.len()).map(move |p| (k, p))).collect();
    let out: Vec<(FeatureOccupancy, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(k, p)| {
            let kind = KINDS[k];
            let path = cache_path(cache_dir, root, seed, kind, basis.dim(), p);
            if let Some(path) = path.as_ref().filter(|p| p.exists()) {
                return Ok((FeatureOccupancy::load(path)?, Vec::new()));
            }
            let arm = (basis.dim() * 64 + k * 16 + p) as u32;
            let mut rng = trial_rng(root, arm, seed as u32);
            let learned = learn_feature_occupancy(kind, basis, &family[p], cfg, &mut rng)?;
            if let Some(path) = path {
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
                }
                learned.0.save(&path)?;
            }
            Ok(learned)
        })
        .collect::<Result<_>>()?;
    let mut reps = vec![Vec::new(), Vec::new()];
    let mut curves = vec![Vec::new(), Vec::new()];
    for ((k, _), (rep, curve)) in jobs.into_iter().zip(out) {
        reps[k].push(rep);
        curves[k].push(curve);
    }
    Ok(Learned { reps, curves })
}

/// Mean TD-error norm of each replay pass, summarised over all curves.
fn pass_series(name: &str, curves: &[&Vec<f64>], passes: usize) -> Series {
    let mut series = Series::new(name, "pass", "td_error_norm_mean", "td_error_norm_std");
    let curves: Vec<&&Vec<f64>> = curves.iter().filter(|c| !c.is_empty()).collect();
    if curves.is_empty() {
        return series;
    }
    let per_pass = curves[0].len() / passes;
    for pass in 0..passes {
        let samples: Vec<f64> = curves
            .iter()
            .map(|c| c[pass * per_pass..(pass + 1) * per_pass].iter().sum::<f64>() / per_pass as f64)
            .collect();
        series.push_samples(pass as f64, &samples);
    }
    series
}

/// Reward samples along short random-force rollouts from uniform states.
fn reward_samples<R: Rng>(basis: &FeatureBasis, goal: f64, rollouts: usize, steps: usize, rng: &mut R) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut samples = Vec::with_capacity(rollouts * steps);
    for _ in 0..rollouts {
        let mut s = CarState::new(rng.gen_range(MIN_POSITION..MAX_POSITION), rng.gen_range(-MAX_SPEED..MAX_SPEED));
        for _ in 0..steps {
            samples.push((rbf_features(basis, s), goal_reward(s.position, goal, basis.width)));
            s = mountain_car_step(s, rng.gen_range(-1.0..1.0))?;
        }
    }
    Ok(samples)
}

pub fn run_selection(config: &ExperimentConfig) -> Result<Report> {
    let p: SelectionParams = config.params()?;
    if p.seeds == 0 || p.goals_per_seed == 0 || p.regression_rollouts == 0 || p.regression_steps == 0 || p.horizon == 0 {
        return Err(HarnessError::Usage("mountaincar-ff counts must be at least 1".into()));
    }
    if !(p.goal_min < p.goal_max) {
        return Err(HarnessError::Usage("mountaincar-ff.goal_min must be below goal_max".into()));
    }
    let cfg = p.pretrain.to_config()?;
    let basis = FeatureBasis::uniform(p.dim, p.threshold)?;
    let family = FixedPowerPolicy::family();
    let start = CarState::start();
    let mut trials = Table::new(
        "trials",
        &["seed", "goal_position", "method", "V_est", "V_true", "V_star", "selected_power"],
    );
    let mut curves: Vec<Vec<Vec<f64>>> = vec![Vec::new(), Vec::new()];
    for seed in 0..p.seeds {
        let learned = learn_family(&basis, &cfg, config.seed, seed, &p.cache_dir)?;
        let mut rng = trial_rng(config.seed, GOAL_ARM, seed as u32);
        for _ in 0..p.goals_per_seed {
            let goal = rng.gen_range(p.goal_min..p.goal_max);
            let w = fit_reward_weights(&reward_samples(&basis, goal, p.regression_rollouts, p.regression_steps, &mut rng)?)?;
            let values: Vec<f64> = family
                .iter()
                .map(|pi| true_policy_value(pi, start, goal, cfg.gamma, p.horizon))
                .collect::<std::result::Result<_, _>>()?;
            let v_star = values.iter().copied().fold(0.0, f64::max);
            for (k, kind) in KINDS.iter().enumerate() {
                let (i, v_est) = smp_select(&learned.reps[k], &w, start)?;
                trials.push([
                    seed.to_string(),
                    goal.to_string(),
                    format!("{}-SMP", kind.as_str()),
                    v_est.to_string(),
                    values[i].to_string(),
                    v_star.to_string(),
                    family[i].power.to_string(),
                ]);
            }
        }
        for k in 0..KINDS.len() {
            curves[k].extend(learned.curves[k].iter().cloned());
        }
    }

    let mut errors = Table::new("errors", &["task", "method", "abs_error", "V_true"]);
    let (est, tru) = (trials.column("V_est").unwrap(), trials.column("V_true").unwrap());
    for r in &trials.rows {
        let e = (r[est].parse::<f64>().unwrap() - r[tru].parse::<f64>().unwrap()).abs();
        errors.push(["mountaincar".to_string(), r[2].clone(), e.to_string(), r[tru].clone()]);
    }
    let mut summary = summarize(&errors, "task", "method", "V_true", "summary")?;
    let err_summary = summarize(&errors, "task", "method", "abs_error", "summary_abs_error")?;
    let stars = trials.numeric("V_star", |r| r[2] == "FF-SMP")?;
    let (m, s) = mean_std(&stars).expect("at least one goal");
    summary.push(["mountaincar".to_string(), "optimal".into(), m.to_string(), s.to_string(), stars.len().to_string()]);

    let mut series = Vec::new();
    for (k, kind) in KINDS.iter().enumerate() {
        let refs: Vec<&Vec<f64>> = curves[k].iter().collect();
        let s = pass_series(&format!("td_curve_{}", kind.as_str().to_lowercase()), &refs, cfg.epochs);
        if !s.points.is_empty() {
            series.push(s);
        }
        let mut by_goal = Series::new(format!("value_{}", kind.as_str().to_lowercase()), "goal_bin", "V_true_mean", "V_true_std");
        let bins = 10;
        for b in 0..bins {
            let lo = p.goal_min + (p.goal_max - p.goal_min) * b as f64 / bins as f64;
            let hi = p.goal_min + (p.goal_max - p.goal_min) * (b + 1) as f64 / bins as f64;
            let method = format!("{}-SMP", kind.as_str());
            let vals = trials.numeric("V_true", |r| {
                let g: f64 = r[1].parse().unwrap_or(f64::NAN);
                r[2] == method && g >= lo && g < hi
            })?;
            by_goal.push_samples((lo + hi) / 2.0, &vals);
        }
        if !by_goal.points.is_empty() {
            series.push(by_goal);
        }
    }
    Ok(Report {
        tables: vec![trials, summary, err_summary],
        series,
        ..Default::default()
    })
}

fn argmax_first(values: &[f64]) -> usize {
    (0..values.len()).fold(0, |best, i| if values[i] > values[best] { i } else { best })
}

pub fn run_dims(config: &ExperimentConfig) -> Result<Report> {
    let p: DimsParams = config.params()?;
    if p.dims.is_empty() || p.goals.is_empty() || p.seeds == 0 || p.horizon == 0 || p.dims.contains(&0) {
        return Err(HarnessError::Usage("mountaincar-dims needs dims >= 1, goals and seeds".into()));
    }
    let cfg = p.pretrain.to_config()?;
    let family = FixedPowerPolicy::family();
    let start = CarState::start();
    let mut trials = Table::new(
        "trials",
        &["dim", "seed", "goal_position", "method", "selected_power", "optimal_power", "power_distance"],
    );
    let mut series: Vec<Series> = KINDS
        .iter()
        .map(|k| Series::new(format!("power_distance_{}", k.as_str().to_lowercase()), "dim", "power_distance_mean", "power_distance_std"))
        .collect();
    for &dim in &p.dims {
        let basis = FeatureBasis::uniform(dim, p.threshold)?;
        let mut distances: Vec<Vec<f64>> = vec![Vec::new(), Vec::new()];
        for seed in 0..p.seeds {
            let learned = learn_family(&basis, &cfg, config.seed, seed, &p.cache_dir)?;
            for &goal in &p.goals {
                let feature = basis.nearest(goal);
                let center = basis.centers[feature];
                let truth: Vec<f64> = family
                    .iter()
                    .map(|pi| true_policy_value(pi, start, center, cfg.gamma, p.horizon))
                    .collect::<std::result::Result<_, _>>()?;
                let optimal = family[argmax_first(&truth)].power;
                for (k, kind) in KINDS.iter().enumerate() {
                    let est: Vec<f64> = learned.reps[k].iter().map(|r| r.at(start)[feature]).collect();
                    let chosen = family[argmax_first(&est)].power;
                    let distance = (chosen - optimal).abs();
                    distances[k].push(distance);
                    trials.push([
                        dim.to_string(),
                        seed.to_string(),
                        goal.to_string(),
                        kind.as_str().to_string(),
                        chosen.to_string(),
                        optimal.to_string(),
                        distance.to_string(),
                    ]);
                }
            }
        }
        for k in 0..KINDS.len() {
            series[k].push_samples(dim as f64, &distances[k]);
        }
    }
    let summary = summarize(&trials, "dim", "method", "power_distance", "summary")?;
    Ok(Report {
        tables: vec![trials, summary],
        series,
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    fn tiny(experiment: Experiment, extra: &[&str]) -> ExperimentConfig {
        let name = experiment.name();
        let mut cfg = ExperimentConfig::new(experiment, 3, "unused");
        for kv in [
            format!("{name}.seeds=1"),
            format!("{name}.pretrain.episodes=3"),
            format!("{name}.pretrain.epochs=2"),
            format!("{name}.pretrain.steps=50"),
        ] {
            cfg = cfg.with_override(&kv).unwrap();
        }
        for kv in extra {
            cfg = cfg.with_override(kv).unwrap();
        }
        cfg
    }

    #[test]
    fn selection_rows_and_determinism() {
        let cfg = tiny(Experiment::MountainCarFf, &["mountaincar-ff.goals_per_seed=2", "mountaincar-ff.dim=5"]);
        let a = run_selection(&cfg).unwrap();
        assert_eq!(a, run_selection(&cfg).unwrap());
        let t = a.table("trials").unwrap();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            let (v_true, v_star): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
            assert!(v_true <= v_star);
        }
        assert_eq!(a.series_named("td_curve_ff").unwrap().points.len(), 2);
    }

    #[test]
    fn cache_reproduces_learned_tables() {
        let dir = tempfile::tempdir().unwrap();
        let set = format!("mountaincar-ff.cache_dir={}", dir.path().display());
        let cfg = tiny(Experiment::MountainCarFf, &["mountaincar-ff.goals_per_seed=1", "mountaincar-ff.dim=4", &set]);
        let first = run_selection(&cfg).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 18);
        let second = run_selection(&cfg).unwrap();
        assert_eq!(first.table("trials"), second.table("trials"));
    }

    #[test]
    fn dims_rows() {
        let cfg = tiny(Experiment::MountainCarDims, &["mountaincar-dims.dims=[3, 4]", "mountaincar-dims.goals=[0.1]"]);
        let r = run_dims(&cfg).unwrap();
        assert_eq!(r.table("trials").unwrap().rows.len(), 4);
        assert_eq!(r.series_named("power_distance_sf").unwrap().points.len(), 2);
        let bad = tiny(Experiment::MountainCarDims, &["mountaincar-dims.dims=[]"]);
        assert!(matches!(run_dims(&bad), Err(HarnessError::Usage(_))));
    }
}
