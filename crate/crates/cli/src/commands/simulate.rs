//! `simulate`: seeded replication fan-out, merge, CSV + manifest emission,
//! and the pathwise-invariant gate.

use crate::io::{config_hash, Csv};
use crate::manifest::{ManifestSummary, RunManifest};
use crate::ExitClass;
use anyhow::{Context, Result};
use fluidnet::config::{ExperimentConfig, GridSpec};
use fluidnet::sim::{run_replications, PathStats, RunRecord, SimConfig};
use std::path::Path;
use std::time::Instant;

pub struct SimulateArtifacts {
    pub manifest: RunManifest,
    pub stats: PathStats,
    pub exit: ExitClass,
}

const RESIDUAL_TOL: f64 = 1e-9;

pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    seeds_override: Option<Vec<u64>>,
    workers: Option<usize>,
    grid_override: Option<GridSpec>,
) -> Result<SimulateArtifacts> {
    let params = cfg.network.build()?;
    let mut sim_cfg = cfg.simulate.build()?;
    if let Some(g) = grid_override {
        sim_cfg.grid = g.materialize();
        sim_cfg.validate()?;
    }
    let seeds = seeds_override.unwrap_or_else(|| cfg.simulate.seeds.clone());
    anyhow::ensure!(!seeds.is_empty(), "at least one seed required");

    let start = Instant::now();
    let (stats, records) = match workers {
        Some(n) => fluidnet::par::with_workers(n, || run_replications(&params, &sim_cfg, &seeds))?,
        None => run_replications(&params, &sim_cfg, &seeds)?,
    };
    let wall_clock_ms = start.elapsed().as_millis();

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut per_seed_files = Vec::new();
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.seed);
    for rec in &sorted {
        let single = PathStats::from_records(std::slice::from_ref(*rec), &sim_cfg)
            .expect("single record merges");
        let name = format!("run_seed_{}.csv", rec.seed);
        write_tails_csv(&single, Some((rec, &sim_cfg)), &out_dir.join(&name))?;
        per_seed_files.push(name);
    }

    let mut output_files = vec!["tails.csv".to_string(), "summary.csv".to_string()];
    write_tails_csv(&stats, None, &out_dir.join("tails.csv"))?;
    if sim_cfg.with_majorant {
        write_majorant_csv(&stats, &out_dir.join("majorant_tails.csv"))?;
        output_files.push("majorant_tails.csv".to_string());
    }
    if !sim_cfg.palm_grid.is_empty() {
        write_palm_csv(&stats, &out_dir.join("palm.csv"))?;
        output_files.push("palm.csv".to_string());
    }
    if !sim_cfg.thetas.is_empty() && params.arrival().is_poisson() {
        write_balance_csv(&stats, &params, &out_dir.join("balance.csv"))?;
        output_files.push("balance.csv".to_string());
    }
    write_summary_csv(&stats, &sim_cfg, &out_dir.join("summary.csv"))?;

    let invariants_ok =
        stats.max_residual < RESIDUAL_TOL && stats.min_z >= 0.0 && stats.dominance != Some(false);
    let summary = ManifestSummary {
        horizon: sim_cfg.horizon,
        warmup: sim_cfg.warmup,
        total_window: stats.total_time,
        events: stats.events,
        max_reflection_residual: stats.max_residual,
        min_z: stats.min_z,
        dominance: stats.dominance,
        y_rate1: stats.y_rate(1).value,
        y_rate1_halfwidth: stats.y_rate(1).halfwidth,
        y_rate2: stats.y_rate(2).value,
        y_rate2_halfwidth: stats.y_rate(2).halfwidth,
        empty_fraction: stats.empty_fraction().value,
        empty_fraction_halfwidth: stats.empty_fraction().halfwidth,
        invariants_ok,
    };
    let manifest = RunManifest {
        schema_version: fluidnet::config::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(cfg),
        seeds: stats.seeds.clone(),
        effective_grid: sim_cfg.grid.clone(),
        per_seed_files,
        output_files,
        summary,
        wall_clock_ms,
    };
    manifest.save(&out_dir.join("manifest.json"))?;

    let exit = if invariants_ok {
        ExitClass::Ok
    } else {
        ExitClass::Invariant
    };
    Ok(SimulateArtifacts {
        manifest,
        stats,
        exit,
    })
}

fn write_tails_csv(
    stats: &PathStats,
    per_seed: Option<(&RunRecord, &SimConfig)>,
    path: &Path,
) -> Result<()> {
    let mut csv = Csv::new("direction_c1,x,tail_estimate,ci_halfwidth");
    for (di, c) in stats.directions.iter().enumerate() {
        let c1 = c.c1();
        for (gi, &x) in stats.grid.iter().enumerate() {
            let e = stats.tail(di, gi);
            csv.row(&[&c1, &x, &e.value, &e.halfwidth]);
        }
    }
    if let Some((rec, cfg)) = per_seed {
        csv.raw_line("");
        csv.raw_line("metric,value");
        let y1 = stats.y_rate(1).value;
        let y2 = stats.y_rate(2).value;
        let empty = stats.empty_fraction().value;
        csv.row(&[&"y_rate1", &y1]);
        csv.row(&[&"y_rate2", &y2]);
        csv.row(&[&"empty_fraction", &empty]);
        csv.row(&[&"horizon", &cfg.horizon]);
        csv.row(&[&"seed", &rec.seed]);
    }
    csv.write_to(path)
}

fn write_majorant_csv(stats: &PathStats, path: &Path) -> Result<()> {
    let mut csv = Csv::new("node,x,tail_estimate,ci_halfwidth");
    for node in [1usize, 2] {
        for (gi, &x) in stats.grid.iter().enumerate() {
            let e = stats.majorant_tail(node, gi);
            csv.row(&[&node, &x, &e.value, &e.halfwidth]);
        }
    }
    csv.write_to(path)
}

fn write_palm_csv(stats: &PathStats, path: &Path) -> Result<()> {
    let mut csv = Csv::new(
        "node,x,palm_tail_rate,palm_tail_halfwidth,boundary_joint_fraction,boundary_joint_halfwidth",
    );
    for node in [1usize, 2] {
        for (pi, &x) in stats.palm_grid.iter().enumerate() {
            let p = stats.palm_tail(node, pi);
            // palm_tail of node i weights Z_{3-i}; the matching joint
            // occupation is the other node's
            let j = stats.boundary_joint(3 - node, pi);
            csv.row(&[&node, &x, &p.value, &p.halfwidth, &j.value, &j.halfwidth]);
        }
    }
    csv.write_to(path)
}

fn write_balance_csv(
    stats: &PathStats,
    params: &fluidnet::network::NetworkParams,
    path: &Path,
) -> Result<()> {
    let mut csv = Csv::new("theta1,theta2,residual,se");
    for (ti, &(t1, t2)) in stats.thetas.iter().enumerate() {
        let r = stats.balance_residual(params, ti)?;
        csv.row(&[&t1, &t2, &r.value, &r.halfwidth]);
    }
    csv.write_to(path)
}

fn write_summary_csv(stats: &PathStats, cfg: &SimConfig, path: &Path) -> Result<()> {
    let mut csv = Csv::new("metric,value,halfwidth");
    let rows: Vec<(&str, f64, f64)> = vec![
        ("y_rate1", stats.y_rate(1).value, stats.y_rate(1).halfwidth),
        ("y_rate2", stats.y_rate(2).value, stats.y_rate(2).halfwidth),
        (
            "empty_fraction",
            stats.empty_fraction().value,
            stats.empty_fraction().halfwidth,
        ),
        ("palm_atom1", stats.palm_atom(1).value, stats.palm_atom(1).halfwidth),
        ("palm_atom2", stats.palm_atom(2).value, stats.palm_atom(2).halfwidth),
        ("max_reflection_residual", stats.max_residual, 0.0),
        ("min_z", stats.min_z, 0.0),
        (
            "dominance",
            match stats.dominance {
                Some(true) => 1.0,
                Some(false) => 0.0,
                None => -1.0,
            },
            0.0,
        ),
        ("events", stats.events as f64, 0.0),
        ("horizon", cfg.horizon, 0.0),
        ("warmup", cfg.warmup, 0.0),
        ("total_window", stats.total_time, 0.0),
        ("n_batches", stats.n_batches() as f64, 0.0),
    ];
    for (k, v, hw) in rows {
        csv.row(&[&k, &v, &hw]);
    }
    csv.write_to(path)
}
