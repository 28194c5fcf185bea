//! Run manifest: everything needed to reproduce a simulation's numbers
//! bit-exactly, plus coarse telemetry.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    /// tail grid actually used (config grid unless overridden on the
    /// command line)
    pub effective_grid: Vec<f64>,
    pub per_seed_files: Vec<String>,
    pub output_files: Vec<String>,
    pub summary: ManifestSummary,
    /// telemetry only: the single field excluded from byte-identity checks
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestSummary {
    pub horizon: f64,
    pub warmup: f64,
    pub total_window: f64,
    pub events: u64,
    pub max_reflection_residual: f64,
    pub min_z: f64,
    pub dominance: Option<bool>,
    pub y_rate1: f64,
    pub y_rate1_halfwidth: f64,
    pub y_rate2: f64,
    pub y_rate2_halfwidth: f64,
    pub empty_fraction: f64,
    pub empty_fraction_halfwidth: f64,
    pub invariants_ok: bool,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).context("serializing manifest")?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).context("parsing manifest")
    }
}
