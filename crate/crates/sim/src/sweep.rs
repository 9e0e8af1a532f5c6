//! Monte Carlo sweeps over one scenario parameter.
//!
//! Every trial draws its own user field from `trial_seed(master, point,
//! trial)`, so results do not depend on the worker count or on which points
//! are run. Trials are mapped in parallel and reduced in index order.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use coop_oam_core::analytic;
use coop_oam_core::scenario::{PairingExponent, ScenarioConfig};
use coop_oam_core::selection::Region;
use coop_oam_core::trial::{run_trial, trial_seed, TrialOptions, TrialOutcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("point {point} ({value}): {source}")]
    Scenario { point: usize, value: f64, source: coop_oam_core::Error },
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    BsCoverageRadius,
    UserCount,
    D2dMax,
    BsHeight,
    RingHalfWidth,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::BsCoverageRadius,
        SweepVariable::UserCount,
        SweepVariable::D2dMax,
        SweepVariable::BsHeight,
        SweepVariable::RingHalfWidth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::BsCoverageRadius => "bs_coverage_radius",
            SweepVariable::UserCount => "user_count",
            SweepVariable::D2dMax => "d2d_max",
            SweepVariable::BsHeight => "bs_height",
            SweepVariable::RingHalfWidth => "ring_half_width",
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) {
        match self {
            SweepVariable::BsCoverageRadius => cfg.bs_coverage_radius = value,
            SweepVariable::UserCount => cfg.user_count = value as usize,
            SweepVariable::D2dMax => cfg.d2d_max = value,
            SweepVariable::BsHeight => cfg.bs_height = value,
            SweepVariable::RingHalfWidth => cfg.ring_half_width = value,
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| format!("unknown sweep variable `{s}`"))
    }
}

/// Shape of the area users are dropped into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionShape {
    /// Disk of radius `R_BS`.
    #[default]
    Disk,
    /// Square of side `2·R_BS`.
    Square,
}

impl RegionShape {
    pub fn region(self, cfg: &ScenarioConfig) -> Region {
        match self {
            RegionShape::Disk => Region::Disk { radius: cfg.bs_coverage_radius },
            RegionShape::Square => Region::Square { side: 2.0 * cfg.bs_coverage_radius },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: ScenarioConfig,
    pub master_seed: u64,
    pub region: RegionShape,
    /// Evaluate channels and spectrum efficiency, not just pair formation.
    pub evaluate_channel: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.trials == 0 {
            return Err(SweepError::Invalid("trials must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(SweepError::Invalid("no sweep values".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(SweepError::Invalid("sweep values must be strictly monotone".into()));
        }
        if self.variable == SweepVariable::UserCount && self.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return Err(SweepError::Invalid("user_count values must be non-negative integers".into()));
        }
        for (point, &value) in self.values.iter().enumerate() {
            self.point_config(value).validate().map_err(|source| SweepError::Scenario { point, value, source })?;
        }
        Ok(())
    }

    pub fn point_config(&self, value: f64) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        self.variable.apply(&mut cfg, value);
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub value: f64,
    pub p_cow_analytic_per_user: f64,
    pub p_cow_analytic_per_pair: f64,
    pub p_cow_montecarlo: f64,
    pub mc_stderr: f64,
    pub successes: usize,
    pub trials: usize,
    pub mean_cu_count: f64,
    /// Means over successful trials; NaN when there were none.
    pub mean_se_per_mode: Vec<f64>,
    pub mean_se_total: f64,
    /// Standard error of `mean_se_total`.
    pub se_total_stderr: f64,
    pub mean_se_steered: f64,
    /// Baseline on the same fields as `mean_se_total`.
    pub mean_se_baseline: f64,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub points: Vec<PointResult>,
    pub runtime_secs: f64,
}

/// Runs every point of `spec` on a pool of `workers` threads.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let started = Instant::now();
    let mut points = Vec::with_capacity(spec.values.len());
    for (point, &value) in spec.values.iter().enumerate() {
        let t0 = Instant::now();
        let cfg = spec.point_config(value);
        let region = spec.region.region(&cfg);
        let opts = TrialOptions { evaluate_channel: spec.evaluate_channel };
        let outcomes: Result<Vec<TrialOutcome>, _> = pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(&cfg, region, trial_seed(spec.master_seed, point as u64, t as u64), opts))
                .collect()
        });
        let outcomes = outcomes.map_err(|source| SweepError::Scenario { point, value, source })?;
        points.push(aggregate(&cfg, value, &outcomes, t0.elapsed().as_secs_f64()));
    }
    Ok(SweepResult { variable: spec.variable, points, runtime_secs: started.elapsed().as_secs_f64() })
}

fn aggregate(cfg: &ScenarioConfig, value: f64, outcomes: &[TrialOutcome], runtime_secs: f64) -> PointResult {
    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.success()).count();
    let p = successes as f64 / trials as f64;
    let cu_total: usize = outcomes.iter().map(TrialOutcome::cu_count).sum();

    let modes = cfg.mode_set.len();
    let mut per_mode = vec![0.0; modes];
    let (mut total, mut total_sq, mut steered, mut baseline, mut n) = (0.0, 0.0, 0.0, 0.0, 0usize);
    for o in outcomes {
        let Some(eff) = &o.efficiency else { continue };
        for (acc, v) in per_mode.iter_mut().zip(&eff.modes.per_mode) {
            *acc += v;
        }
        total += eff.modes.total;
        total_sq += eff.modes.total * eff.modes.total;
        steered += eff.steered.total;
        baseline += o.baseline.as_ref().map_or(0.0, |b| b.total);
        n += 1;
    }
    let mean = |s: f64| if n == 0 { f64::NAN } else { s / n as f64 };
    let se_total_stderr = if n < 2 {
        f64::NAN
    } else {
        let m = total / n as f64;
        ((total_sq / n as f64 - m * m).max(0.0) * n as f64 / (n - 1) as f64 / n as f64).sqrt()
    };

    let analytic_for = |e: PairingExponent| {
        let c = ScenarioConfig { pairing_exponent: e, ..cfg.clone() };
        analytic::formation_probability(&c).p_cow
    };

    PointResult {
        value,
        p_cow_analytic_per_user: analytic_for(PairingExponent::PerUser),
        p_cow_analytic_per_pair: analytic_for(PairingExponent::PerPair),
        p_cow_montecarlo: p,
        mc_stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        successes,
        trials,
        mean_cu_count: cu_total as f64 / trials as f64,
        mean_se_per_mode: per_mode.into_iter().map(mean).collect(),
        mean_se_total: mean(total),
        se_total_stderr,
        mean_se_steered: mean(steered),
        mean_se_baseline: mean(baseline),
        runtime_secs,
    }
}
