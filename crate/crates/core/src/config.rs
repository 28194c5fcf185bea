//! Configuration schema: plain data structs that mirror the experiment file
//! format, plus conversions into the validated model types.
//!
//! Distribution grammar, per family:
//! `{family = "pareto", scale = 1.0, index = 2.5}`,
//! `{family = "weibull", scale = 1.0, shape = 0.5}`,
//! `{family = "lognormal", log_mean = 0.0, log_std = 1.0}`,
//! `{family = "exponential", rate = 1.0}`,
//! `{family = "deterministic", value = 1.0}`.

use crate::dist::{Direction, HeavyDist, JumpModel};
use crate::network::{ArrivalModel, NetworkParams};
use crate::sim::SimConfig;
use crate::Result;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub network: NetworkSection,
    pub simulate: SimulateSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub mu1: f64,
    pub mu2: f64,
    pub p12: f64,
    pub p21: f64,
    pub arrival: ArrivalSpec,
    pub jumps: JumpsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ArrivalSpec {
    Poisson { rate: f64 },
    Renewal { interarrival: DistSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Pareto { scale: f64, index: f64 },
    Weibull { scale: f64, shape: f64 },
    Lognormal { log_mean: f64, log_std: f64 },
    Exponential { rate: f64 },
    Deterministic { value: f64 },
}

impl DistSpec {
    pub fn build(&self) -> Result<HeavyDist> {
        match *self {
            DistSpec::Pareto { scale, index } => HeavyDist::pareto(scale, index),
            DistSpec::Weibull { scale, shape } => HeavyDist::weibull(scale, shape),
            DistSpec::Lognormal { log_mean, log_std } => HeavyDist::lognormal(log_mean, log_std),
            DistSpec::Exponential { rate } => HeavyDist::exponential(rate),
            DistSpec::Deterministic { value } => HeavyDist::deterministic(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum JumpsSpec {
    Mixture {
        p1: f64,
        p2: f64,
        dist1: DistSpec,
        dist2: DistSpec,
    },
    Independent { dist1: DistSpec, dist2: DistSpec },
}

impl JumpsSpec {
    pub fn build(&self) -> Result<JumpModel> {
        match self {
            JumpsSpec::Mixture { p1, p2, dist1, dist2 } => {
                JumpModel::mixture(*p1, dist1.build()?, *p2, dist2.build()?)
            }
            JumpsSpec::Independent { dist1, dist2 } => {
                Ok(JumpModel::independent(dist1.build()?, dist2.build()?))
            }
        }
    }
}

impl NetworkSection {
    pub fn build(&self) -> Result<NetworkParams> {
        let arrival = match &self.arrival {
            ArrivalSpec::Poisson { rate } => ArrivalModel::Poisson { rate: *rate },
            ArrivalSpec::Renewal { interarrival } => ArrivalModel::Renewal {
                interarrival: interarrival.build()?,
            },
        };
        NetworkParams::new(
            self.mu1,
            self.mu2,
            self.p12,
            self.p21,
            arrival,
            self.jumps.build()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    Log { start: f64, stop: f64, points: usize },
    Linear { start: f64, stop: f64, points: usize },
    Explicit { values: Vec<f64> },
}

impl GridSpec {
    pub fn materialize(&self) -> Vec<f64> {
        match self {
            GridSpec::Log { start, stop, points } => {
                let n = (*points).max(2);
                let (a, b) = (start.ln(), stop.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
            GridSpec::Linear { start, stop, points } => {
                let n = (*points).max(2);
                (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect()
            }
            GridSpec::Explicit { values } => values.clone(),
        }
    }
}

fn default_batches() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub horizon: f64,
    /// defaults to 5% of the horizon
    #[serde(default)]
    pub warmup: Option<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    pub directions: Vec<[f64; 2]>,
    pub grid: GridSpec,
    #[serde(default)]
    pub palm_grid: Option<GridSpec>,
    #[serde(default)]
    pub theta: Vec<[f64; 2]>,
    #[serde(default)]
    pub majorant: bool,
}

impl SimulateSection {
    pub fn build(&self) -> Result<SimConfig> {
        let mut directions = Vec::with_capacity(self.directions.len());
        for &[c1, c2] in &self.directions {
            directions.push(Direction::new(c1, c2)?);
        }
        let cfg = SimConfig {
            horizon: self.horizon,
            warmup: self.warmup.unwrap_or(0.05 * self.horizon),
            batches: self.batches,
            directions,
            grid: self.grid.materialize(),
            palm_grid: self
                .palm_grid
                .as_ref()
                .map(|g| g.materialize())
                .unwrap_or_default(),
            thetas: self.theta.iter().map(|&[a, b]| (a, b)).collect(),
            with_majorant: self.majorant,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSpec {
    AsPrinted,
    Symmetric,
}

impl From<EtaSpec> for crate::asym::EtaReading {
    fn from(e: EtaSpec) -> Self {
        match e {
            EtaSpec::AsPrinted => crate::asym::EtaReading::AsPrinted,
            EtaSpec::Symmetric => crate::asym::EtaReading::Symmetric,
        }
    }
}

fn default_mc_draws() -> u64 {
    1_000_000
}

fn default_mc_seed() -> u64 {
    0x5eed
}

fn default_eta() -> EtaSpec {
    EtaSpec::AsPrinted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// coefficient reading for the second upper-bound term
    #[serde(default = "default_eta")]
    pub eta_second_term: EtaSpec,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: u64,
    #[serde(default = "default_mc_seed")]
    pub mc_seed: u64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            eta_second_term: default_eta(),
            mc_draws: default_mc_draws(),
            mc_seed: default_mc_seed(),
        }
    }
}
