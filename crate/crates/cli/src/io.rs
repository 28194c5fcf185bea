//! Config loading, canonical hashing, and small CSV helpers.
//!
//! All numeric output goes through Rust's shortest-roundtrip float
//! formatting, so identical numbers always produce identical bytes.

use anyhow::{Context, Result};
use fluidnet::config::ExperimentConfig;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: ExperimentConfig = toml::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    if cfg.schema_version != fluidnet::config::SCHEMA_VERSION {
        anyhow::bail!(
            "config schema_version {} unsupported (expected {})",
            cfg.schema_version,
            fluidnet::config::SCHEMA_VERSION
        );
    }
    Ok(cfg)
}

/// Hash of the parsed config's canonical serialization: stable under key
/// reordering and formatting changes in the file.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&canonical);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Growable CSV emitter with a fixed header.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{f}");
        }
        self.buf.push('\n');
    }

    pub fn raw_line(&mut self, line: &str) {
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.buf.as_bytes())
            .with_context(|| format!("writing {}", path.display()))
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

/// Parse a CSV file into rows of fields, skipping the header line and any
/// blank or comment lines.
pub fn read_csv(path: &Path) -> Result<Vec<Vec<String>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect())
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().with_context(|| format!("parsing number {s:?}"))
}

/// Seed list syntax: `1,2,5` or an inclusive range `1..8`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().context("seed range start")?;
        let b: u64 = b.trim().parse().context("seed range end")?;
        anyhow::ensure!(a <= b, "empty seed range {s:?}");
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("seed {t:?}")))
        .collect()
}

/// Grid override syntax: `log:start:stop:points`, `lin:start:stop:points`,
/// or an explicit comma list `1.0,2.0,4.0`.
pub fn parse_grid(s: &str) -> Result<fluidnet::config::GridSpec> {
    use fluidnet::config::GridSpec;
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["log", a, b, n] => Ok(GridSpec::Log {
            start: parse_f64(a)?,
            stop: parse_f64(b)?,
            points: n.parse().context("grid points")?,
        }),
        ["lin", a, b, n] => Ok(GridSpec::Linear {
            start: parse_f64(a)?,
            stop: parse_f64(b)?,
            points: n.parse().context("grid points")?,
        }),
        [list] => {
            let values = list
                .split(',')
                .map(parse_f64)
                .collect::<Result<Vec<f64>>>()?;
            Ok(GridSpec::Explicit { values })
        }
        _ => anyhow::bail!("unrecognized grid spec {s:?}"),
    }
}
