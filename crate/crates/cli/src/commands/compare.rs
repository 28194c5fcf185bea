//! `compare`: join simulated tails with the analytic bounds and asymptotes,
//! apply the acceptance thresholds, and emit per-criterion verdicts.

use crate::io::{config_hash, parse_f64, read_csv, Csv};
use crate::manifest::RunManifest;
use crate::verdict::{exit_class, render, to_csv, Verdict, VerdictClass};
use crate::ExitClass;
use anyhow::{Context, Result};
use fluidnet::asym::{
    exact_asymptote, coordinate_tail_bounds, direction_tail_bounds, BoundMode, BoundReport, EtaReading,
    McSettings,
};
use fluidnet::config::{ArrivalSpec, ExperimentConfig};
use fluidnet::dist::{Direction, GeometricSum};
use fluidnet::network::{DerivedQuantities, DirectionCase, NetworkParams, Stability};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::Path;

const SANDWICH_MIN_EST: f64 = 1e-4;
const ADMISSIBLE_MIN_EST: f64 = 1e-3;
const TREND_WINDOW: f64 = 10.0;

struct TailTable {
    /// per direction: (x, estimate, halfwidth)
    by_direction: Vec<Vec<(f64, f64, f64)>>,
}

pub fn cmd_compare(
    cfg: &ExperimentConfig,
    manifest_path: &Path,
    out: Option<&Path>,
) -> Result<(Vec<Verdict>, ExitClass)> {
    let manifest = RunManifest::load(manifest_path)?;
    anyhow::ensure!(
        manifest.config_hash == config_hash(cfg),
        "manifest config hash {} does not match supplied config {}",
        manifest.config_hash,
        config_hash(cfg)
    );
    let dir = manifest_path
        .parent()
        .context("manifest path has no parent directory")?;
    let params = cfg.network.build()?;
    let d = params.derive();
    let mut sim_cfg = cfg.simulate.build()?;
    // the run may have overridden the tail grid; the manifest records it
    sim_cfg.grid = manifest.effective_grid.clone();
    let mc = McSettings {
        draws: cfg.analysis.mc_draws,
        seed: cfg.analysis.mc_seed,
    };

    let tails = load_tails(&dir.join("tails.csv"), &sim_cfg)?;
    let summary = load_summary(&dir.join("summary.csv"))?;
    let mut verdicts = Vec::new();

    // pathwise invariants recorded by simulate
    let residual = summary_value(&summary, "max_reflection_residual")?;
    verdicts.push(Verdict::new(
        "reflection_identity",
        VerdictClass::Invariant,
        residual.0 < 1e-9,
        format!("max |reflection residual| {} < 1e-9", residual.0),
    ));
    let min_z = summary_value(&summary, "min_z")?;
    verdicts.push(Verdict::new(
        "nonnegativity",
        VerdictClass::Invariant,
        min_z.0 >= 0.0,
        format!("min coordinate {}", min_z.0),
    ));
    match manifest.summary.dominance {
        Some(ok) => verdicts.push(Verdict::new(
            "majorant_dominance",
            VerdictClass::Invariant,
            ok,
            format!("pathwise dominance at every epoch: {ok}"),
        )),
        None => verdicts.push(Verdict::skipped(
            "majorant_dominance",
            VerdictClass::Invariant,
            "majorant not simulated",
        )),
    }

    // regulator rates vs closed form (value and precision)
    for node in [1usize, 2] {
        let (val, hw) = summary_value(&summary, &format!("y_rate{node}"))?;
        let target = if node == 1 {
            d.mu1 * (1.0 - d.rho1)
        } else {
            d.mu2 * (1.0 - d.rho2)
        };
        let ok = (val - target).abs() <= 3.0 * hw && hw < 0.01 * val;
        verdicts.push(Verdict::new(
            format!("regulator_rate_{node}"),
            VerdictClass::Statistical,
            ok,
            format!("estimate {val} vs target {target} (hw {hw})"),
        ));
    }

    // empty-state bound
    let (empty, empty_hw) = summary_value(&summary, "empty_fraction")?;
    let bound = (1.0 - d.rho1).min(1.0 - d.rho2);
    verdicts.push(Verdict::new(
        "empty_state_bound",
        VerdictClass::Statistical,
        empty < bound + 3.0 * empty_hw && empty > 0.0,
        format!("empty fraction {empty} < min idle bound {bound}"),
    ));

    // Palm atom identity: nu_i(0) rate vs mu_i * empty fraction
    for node in [1usize, 2] {
        let (atom, atom_hw) = summary_value(&summary, &format!("palm_atom{node}"))?;
        let mu = params.mu(node);
        let target = mu * empty;
        let tol = 3.0 * (atom_hw.powi(2) + (mu * empty_hw).powi(2)).sqrt();
        verdicts.push(Verdict::new(
            format!("palm_atom_{node}"),
            VerdictClass::Statistical,
            (atom - target).abs() <= tol.max(1e-12),
            format!("atom rate {atom} vs mu*empty {target}"),
        ));
    }

    // Palm tail identity per node on the palm grid
    let palm_path = dir.join("palm.csv");
    if palm_path.exists() {
        let rows = read_csv(&palm_path)?;
        let mut worst: f64 = 0.0;
        let mut checked = 0usize;
        let mut ok = true;
        for row in &rows {
            let node: usize = row[0].parse().context("palm node")?;
            let palm = parse_f64(&row[2])?;
            let palm_hw = parse_f64(&row[3])?;
            let joint = parse_f64(&row[4])?;
            let joint_hw = parse_f64(&row[5])?;
            if joint <= ADMISSIBLE_MIN_EST {
                continue;
            }
            let drain = if node == 1 { d.drain1 } else { d.drain2 };
            let tol = 3.0 * (palm_hw.powi(2) + (drain * joint_hw).powi(2)).sqrt();
            let gap = (palm - drain * joint).abs();
            if gap > tol.max(1e-12) {
                ok = false;
            }
            worst = worst.max(gap / tol.max(1e-300));
            checked += 1;
        }
        verdicts.push(Verdict::new(
            "palm_tail_identity",
            VerdictClass::Statistical,
            ok && checked > 0,
            format!("{checked} admissible points; worst gap {worst:.3} of tolerance"),
        ));
    }

    // stationary-equation residuals
    let balance_path = dir.join("balance.csv");
    if balance_path.exists() {
        for row in read_csv(&balance_path)? {
            let (t1, t2) = (parse_f64(&row[0])?, parse_f64(&row[1])?);
            let resid = parse_f64(&row[2])?;
            let se = parse_f64(&row[3])?;
            if t1 == 0.0 && t2 == 0.0 {
                verdicts.push(Verdict::new(
                    "balance_residual_origin",
                    VerdictClass::Invariant,
                    resid == 0.0,
                    format!("residual at (0,0) = {resid}"),
                ));
            } else {
                verdicts.push(Verdict::new(
                    format!("balance_residual_({t1},{t2})"),
                    VerdictClass::Statistical,
                    resid <= 3.0 * se,
                    format!("residual {resid} vs 3se {}", 3.0 * se),
                ));
            }
        }
    } else if !params.arrival().is_poisson() {
        verdicts.push(Verdict::skipped(
            "balance_residual",
            VerdictClass::Statistical,
            "stationary equation requires Poisson arrivals",
        ));
    }

    // tail sandwiches, exact mode; the sandwich bounds assume Poisson
    // arrivals, so renewal runs skip them
    let mut bound_reports = Vec::new();
    if !params.arrival().is_poisson() {
        verdicts.push(Verdict::skipped(
            "tail_sandwich",
            VerdictClass::Statistical,
            "bounds derive from the Poisson stationary equation",
        ));
    } else if d.stability() == Stability::StronglyStable {
        for (di, c) in sim_cfg.directions.iter().enumerate() {
            let sim = &tails.by_direction[di];
            if c.c1() == 1.0 {
                let rep = coordinate_tail_bounds(
                    &d,
                    params.jumps().component(1),
                    &sim_cfg.grid,
                    BoundMode::GeomSumExact,
                    &mc,
                )?;
                verdicts.push(sandwich_verdict("coordinate_sandwich", sim, &rep));
                bound_reports.push((rep, "as_printed"));
            } else {
                let dc = d.classify_direction(*c)?;
                let readings: &[(EtaReading, &str)] = match dc.case {
                    DirectionCase::C0 => &[
                        (EtaReading::AsPrinted, "as_printed"),
                        (EtaReading::Symmetric, "symmetric"),
                    ],
                    _ => &[(EtaReading::AsPrinted, "as_printed")],
                };
                for (eta, label) in readings {
                    let rep = direction_tail_bounds(
                        &dc,
                        &d,
                        params.jumps(),
                        &sim_cfg.grid,
                        BoundMode::GeomSumExact,
                        *eta,
                        &mc,
                    )?;
                    verdicts.push(sandwich_verdict(
                        format!("direction_sandwich_{}_{}_{label}", dc.case, c.c1()),
                        sim,
                        &rep,
                    ));
                    bound_reports.push((rep, *label));
                }
            }
        }
    } else {
        verdicts.push(Verdict::skipped(
            "direction_sandwich",
            VerdictClass::Statistical,
            "needs strong stability",
        ));
    }

    // parallel-queue node-1 tail vs its geometric-sum law
    // (Pollaczek-Khinchine form: Poisson arrivals only)
    let majorant_path = dir.join("majorant_tails.csv");
    if majorant_path.exists() && params.arrival().is_poisson() {
        let rows = read_csv(&majorant_path)?;
        let node1: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r[0] == "1")
            .map(|r| Ok((parse_f64(&r[1])?, parse_f64(&r[2])?, parse_f64(&r[3])?)))
            .collect::<Result<_>>()?;
        verdicts.push(mg1_oracle_verdict(&params, &d, &node1, &mc)?);
    } else if majorant_path.exists() {
        verdicts.push(Verdict::skipped(
            "workload_oracle_node1",
            VerdictClass::Statistical,
            "geometric-sum workload law requires Poisson arrivals",
        ));
    }

    // single-big-jump asymptote: ratio window and trend toward 1
    verdicts.push(trend_verdict(cfg, &params, &d, &sim_cfg.directions, &tails)?);

    let class = exit_class(&verdicts);
    print!("{}", render(&verdicts));
    if let Some(out_dir) = out {
        std::fs::create_dir_all(out_dir)?;
        write_bounds_csv(&bound_reports, &out_dir.join("bounds.csv"))?;
        to_csv(&verdicts).write_to(&out_dir.join("verdicts.csv"))?;
        write_asymptote_csv(cfg, &params, &d, &sim_cfg.directions, &tails, out_dir)?;
    }
    Ok((verdicts, class))
}

fn load_tails(path: &Path, sim_cfg: &fluidnet::sim::SimConfig) -> Result<TailTable> {
    let rows = read_csv(path)?;
    let mut by_direction = vec![Vec::new(); sim_cfg.directions.len()];
    for row in rows {
        // c1 determines the direction: c2 = 1 - c1
        let c1 = parse_f64(&row[0])?;
        let di = sim_cfg
            .directions
            .iter()
            .position(|c| c.c1() == c1)
            .with_context(|| format!("direction with c1 = {c1} not in config"))?;
        by_direction[di].push((parse_f64(&row[1])?, parse_f64(&row[2])?, parse_f64(&row[3])?));
    }
    for (di, rowset) in by_direction.iter().enumerate() {
        anyhow::ensure!(
            rowset.len() == sim_cfg.grid.len(),
            "grid mismatch for direction {di}: {} rows vs {} grid points",
            rowset.len(),
            sim_cfg.grid.len()
        );
        for (r, &g) in rowset.iter().zip(&sim_cfg.grid) {
            anyhow::ensure!(r.0 == g, "grid mismatch: tail row at {} vs config {g}", r.0);
        }
    }
    Ok(TailTable { by_direction })
}

fn load_summary(path: &Path) -> Result<Vec<(String, f64, f64)>> {
    read_csv(path)?
        .into_iter()
        .map(|row| Ok((row[0].clone(), parse_f64(&row[1])?, parse_f64(&row[2])?)))
        .collect()
}

fn summary_value(summary: &[(String, f64, f64)], key: &str) -> Result<(f64, f64)> {
    summary
        .iter()
        .find(|(k, _, _)| k == key)
        .map(|(_, v, hw)| (*v, *hw))
        .with_context(|| format!("summary key {key} missing"))
}

fn sandwich_verdict(
    name: impl Into<String>,
    sim: &[(f64, f64, f64)],
    rep: &BoundReport,
) -> Verdict {
    let mut checked = 0usize;
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (i, &(_x, est, hw)) in sim.iter().enumerate() {
        if est <= SANDWICH_MIN_EST {
            continue;
        }
        checked += 1;
        let lo_tol = 3.0 * (hw * hw + rep.lower_se[i] * rep.lower_se[i]).sqrt();
        let hi_tol = 3.0 * (hw * hw + rep.upper_se[i] * rep.upper_se[i]).sqrt();
        let below = rep.lower[i] - est - lo_tol; // > 0 violates
        let above = est - rep.upper[i] - hi_tol;
        if below > 0.0 || above > 0.0 {
            ok = false;
        }
        worst = worst.max(below.max(above));
    }
    Verdict::new(
        name,
        VerdictClass::Statistical,
        ok && checked > 0,
        format!("{checked} admissible points; worst signed excess {worst:.3e}"),
    )
}

fn mg1_oracle_verdict(
    params: &NetworkParams,
    d: &DerivedQuantities,
    node1: &[(f64, f64, f64)],
    mc: &McSettings,
) -> Result<Verdict> {
    let it = params.jumps().component(1).integrated_tail();
    let gs = GeometricSum::from_integrated(d.ratio1, it)?;
    let grid: Vec<f64> = node1.iter().map(|r| r.0).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(mc.seed ^ 0x9e3779b97f4a7c15);
    let oracle = gs.tail_monte_carlo(&grid, mc.draws, &mut rng);
    let mut ok = true;
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for (&(_, est, hw), (_, p, se)) in node1.iter().zip(&oracle) {
        if est <= ADMISSIBLE_MIN_EST {
            continue;
        }
        checked += 1;
        let tol = 3.0 * (hw * hw + se * se).sqrt();
        let gap = (est - p).abs();
        if gap > tol {
            ok = false;
        }
        worst = worst.max(gap / tol.max(1e-300));
    }
    Ok(Verdict::new(
        "workload_oracle_node1",
        VerdictClass::Statistical,
        ok && checked > 0,
        format!("{checked} admissible points; worst gap {worst:.3} of tolerance"),
    ))
}

fn trend_verdict(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    d: &DerivedQuantities,
    directions: &[Direction],
    tails: &TailTable,
) -> Result<Verdict> {
    let name = "exact_asymptote_trend";
    if !params.jumps().is_mixture() {
        return Ok(Verdict::skipped(
            name,
            VerdictClass::Statistical,
            "needs one-dimensional mixture jumps",
        ));
    }
    if matches!(cfg.network.arrival, ArrivalSpec::Poisson { .. }) {
        return Ok(Verdict::skipped(
            name,
            VerdictClass::Statistical,
            "scored on renewal-arrival runs; see asymptote.csv for the ratios",
        ));
    }
    if d.stability() != Stability::StronglyStable {
        return Ok(Verdict::skipped(
            name,
            VerdictClass::Statistical,
            "needs strong stability",
        ));
    }
    let Some(di) = directions.iter().position(|c| c.c1() == 1.0) else {
        return Ok(Verdict::skipped(
            name,
            VerdictClass::Statistical,
            "coordinate direction (1,0) not simulated",
        ));
    };
    let ea = exact_asymptote(d, params.jumps(), directions[di])?;
    // admissible: estimate exceeds ten halfwidths
    let pts: Vec<(f64, f64)> = tails.by_direction[di]
        .iter()
        .filter(|&&(_, est, hw)| est > 10.0 * hw && est > 0.0)
        .map(|&(x, est, _)| (x, est / ea.eval(x)))
        .collect();
    if pts.is_empty() {
        return Ok(Verdict::new(
            name,
            VerdictClass::Statistical,
            false,
            "insufficient tail resolution".to_string(),
        ));
    }
    let x_max = pts.last().unwrap().0;
    let window: Vec<(f64, f64)> = pts
        .iter()
        .copied()
        .filter(|&(x, _)| x >= x_max / TREND_WINDOW)
        .collect();
    let in_band = window.iter().all(|&(_, r)| (0.7..=1.3).contains(&r));
    // least-squares ratio on log x over the window
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = window.iter().map(|p| (p.0.ln() - mx).powi(2)).sum::<f64>();
    let sxy = window
        .iter()
        .map(|p| (p.0.ln() - mx) * (p.1 - my))
        .sum::<f64>();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let fit = |x: f64| my + slope * (x.ln() - mx);
    let start = fit(window.first().unwrap().0);
    let end = fit(x_max);
    let toward_one = (end - 1.0).abs() <= (start - 1.0).abs() + 0.02;
    Ok(Verdict::new(
        name,
        VerdictClass::Statistical,
        in_band && toward_one,
        format!(
            "{} window points; ratio fit {start:.3} -> {end:.3}; band ok {in_band}",
            window.len()
        ),
    ))
}

fn write_bounds_csv(reports: &[(BoundReport, &str)], path: &Path) -> Result<()> {
    let mut csv = Csv::new("x,lower,upper,mode,case,direction_c1,eta_reading,lower_se,upper_se,clamped");
    for (rep, eta) in reports {
        for (i, &x) in rep.grid.iter().enumerate() {
            let c1 = rep.direction.c1();
            let clamped = if rep.lower_clamped[i] || rep.upper_clamped[i] { 1 } else { 0 };
            csv.row(&[
                &x,
                &rep.lower[i],
                &rep.upper[i],
                &rep.mode,
                &rep.case,
                &c1,
                eta,
                &rep.lower_se[i],
                &rep.upper_se[i],
                &clamped,
            ]);
        }
    }
    csv.write_to(path)
}

fn write_asymptote_csv(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    d: &DerivedQuantities,
    directions: &[Direction],
    tails: &TailTable,
    out_dir: &Path,
) -> Result<()> {
    let _ = cfg;
    if !params.jumps().is_mixture() || d.stability() != Stability::StronglyStable {
        return Ok(());
    }
    let mut csv = Csv::new("direction_c1,x,sim,sim_halfwidth,asymptote,ratio");
    for (di, c) in directions.iter().enumerate() {
        let ea = exact_asymptote(d, params.jumps(), *c)?;
        for &(x, est, hw) in &tails.by_direction[di] {
            let a = ea.eval(x);
            let ratio = if a > 0.0 { est / a } else { f64::NAN };
            csv.row(&[&c.c1(), &x, &est, &hw, &a, &ratio]);
        }
    }
    csv.write_to(&out_dir.join("asymptote.csv"))
}
