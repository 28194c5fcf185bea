//! Acceptance suite: every release criterion at its stated tolerance, one
//! pass/fail line per criterion, against the reference configuration
//! (symmetric network, Pareto(1, 2.5) mixture batches, horizon 1e7 per
//! seed, 8 seeds).

use fluidnet_cli::commands::{cmd_compare, cmd_oracle, cmd_selfcheck, cmd_simulate};
use fluidnet_cli::io::load_config;
use fluidnet_cli::verdict::Verdict;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn check(&mut self, criterion: &str, passed: bool, detail: &str) {
        let status = if passed { "PASS" } else { "FAIL" };
        println!("criterion {criterion}: {status} — {detail}");
        if !passed {
            self.failures.push(format!("{criterion}: {detail}"));
        }
    }

    fn verdict(&mut self, criterion: &str, verdicts: &[Verdict], name: &str) {
        match verdicts.iter().find(|v| v.name == name) {
            Some(v) => self.check(criterion, v.passed == Some(true), &v.detail),
            None => self.check(criterion, false, &format!("verdict {name} missing")),
        }
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fluidnet-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn acceptance_criteria() {
    let root = workspace_root();
    let mut gate = Gate::new();

    // --- reference Poisson run -------------------------------------------
    let cfg = load_config(&root.join("configs/reference.toml")).unwrap();
    let out = temp_dir("reference");
    let artifacts = cmd_simulate(&cfg, &out, None, None, None).unwrap();
    let (verdicts, _) = cmd_compare(&cfg, &out.join("manifest.json"), Some(&out)).unwrap();

    gate.check(
        "01 reflection_identity",
        artifacts.manifest.summary.max_reflection_residual < 1e-9,
        &format!(
            "max per-piece residual {:.3e} over {} events, 8 seeds",
            artifacts.manifest.summary.max_reflection_residual, artifacts.manifest.summary.events
        ),
    );
    gate.check(
        "02 majorant_dominance",
        artifacts.manifest.summary.dominance == Some(true),
        &format!(
            "pathwise dominance with min gap {:.3e}",
            artifacts.stats.majorant_min_gap.unwrap_or(f64::NAN)
        ),
    );
    gate.verdict("03 regulator_rate_node1", &verdicts, "regulator_rate_1");
    gate.verdict("03 regulator_rate_node2", &verdicts, "regulator_rate_2");
    gate.verdict("04 palm_atom_node1", &verdicts, "palm_atom_1");
    gate.verdict("04 palm_atom_node2", &verdicts, "palm_atom_2");
    gate.verdict("04 palm_tail_relation", &verdicts, "palm_tail_identity");
    for theta in ["(-0.5,0)", "(0,-0.5)", "(-0.5,-0.5)", "(-1,-1)"] {
        gate.verdict(
            &format!("05 balance_residual_{theta}"),
            &verdicts,
            &format!("balance_residual_{theta}"),
        );
    }
    gate.verdict("06 coordinate_sandwich", &verdicts, "coordinate_sandwich");
    gate.verdict(
        "06 direction_sandwich_C0",
        &verdicts,
        "direction_sandwich_C0_0.5_as_printed",
    );
    gate.verdict(
        "06 direction_sandwich_C0_symmetric_reading",
        &verdicts,
        "direction_sandwich_C0_0.5_symmetric",
    );
    gate.verdict(
        "06 direction_sandwich_C1",
        &verdicts,
        "direction_sandwich_C1_0.9_as_printed",
    );
    gate.verdict("07 workload_oracle", &verdicts, "workload_oracle_node1");

    // --- renewal run for the exact-asymptote trend ------------------------
    let cfg_renewal = load_config(&root.join("configs/renewal.toml")).unwrap();
    let out_renewal = temp_dir("renewal");
    let artifacts_renewal = cmd_simulate(&cfg_renewal, &out_renewal, None, None, None).unwrap();
    let (verdicts_renewal, _) =
        cmd_compare(&cfg_renewal, &out_renewal.join("manifest.json"), Some(&out_renewal)).unwrap();
    gate.check(
        "01 reflection_identity_renewal",
        artifacts_renewal.manifest.summary.max_reflection_residual < 1e-9,
        &format!(
            "max per-piece residual {:.3e}",
            artifacts_renewal.manifest.summary.max_reflection_residual
        ),
    );
    gate.check(
        "02 majorant_dominance_renewal",
        artifacts_renewal.manifest.summary.dominance == Some(true),
        "pathwise dominance under renewal arrivals",
    );
    gate.verdict("08 exact_asymptote_trend", &verdicts_renewal, "exact_asymptote_trend");

    // --- fluid-model oracle equivalence -----------------------------------
    let (oracle_verdicts, _) = cmd_oracle(10_000, 0xF1D0).unwrap();
    gate.verdict("09 fluid_oracle_agreement", &oracle_verdicts, "fluid_oracle_agreement");
    gate.verdict(
        "09 fluid_oracle_boundary_band",
        &oracle_verdicts,
        "fluid_oracle_boundary_band",
    );

    // --- distribution kernel ----------------------------------------------
    let (self_verdicts, _) = cmd_selfcheck(Some(&cfg)).unwrap();
    gate.verdict("10 series_vs_integral", &self_verdicts, "series_vs_integral");
    gate.verdict("11 mean_tail_integral", &self_verdicts, "mean_tail_integral");
    gate.verdict("11 wald_identity", &self_verdicts, "wald_identity");
    gate.verdict("11 subexp_pareto", &self_verdicts, "subexp_pareto");
    gate.verdict(
        "11 subexp_exponential_flagged",
        &self_verdicts,
        "subexp_exponential_flagged",
    );

    // --- byte-identical repeated pipeline ----------------------------------
    let det = determinism_check(&root);
    gate.check("12 determinism", det.0, &det.1);

    assert!(
        gate.failures.is_empty(),
        "acceptance failures:\n{}",
        gate.failures.join("\n")
    );
}

/// Run the full binary pipeline twice on a reduced copy of the reference
/// configuration and compare every output byte (manifest modulo the
/// wall-clock telemetry field).
fn determinism_check(root: &Path) -> (bool, String) {
    let base = std::fs::read_to_string(root.join("configs/reference.toml")).unwrap();
    let small = base
        .replace("horizon = 1e7", "horizon = 2e5")
        .replace("warmup = 5e5", "warmup = 1e4")
        .replace("seeds = [1, 2, 3, 4, 5, 6, 7, 8]", "seeds = [1, 2]")
        .replace("mc_draws = 1000000", "mc_draws = 100000");
    let dir = temp_dir("determinism");
    let cfg_path = dir.join("small.toml");
    std::fs::write(&cfg_path, small).unwrap();
    let bin = env!("CARGO_BIN_EXE_fluidnet");

    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(run);
        let status = Command::new(bin)
            .args(["simulate", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        if !status.success() {
            return (false, format!("simulate exited {status}"));
        }
        let status = Command::new(bin)
            .args(["compare", "--config"])
            .arg(&cfg_path)
            .args(["--manifest"])
            .arg(out.join("manifest.json"))
            .arg("--out")
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        // statistical clauses are expected to miss at this reduced scale
        // (exit 3); only config/invariant trouble invalidates the check
        if !matches!(status.code(), Some(0) | Some(3)) {
            return (false, format!("compare exited {status}"));
        }
        outputs.push(out);
    }

    let mut names: Vec<String> = std::fs::read_dir(&outputs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut compared = 0;
    for name in &names {
        let a = std::fs::read(outputs[0].join(name)).unwrap();
        let b = std::fs::read(outputs[1].join(name)).unwrap();
        if name == "manifest.json" {
            // wall clock is telemetry; everything else must match bit-exactly
            let strip = |bytes: &[u8]| {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v.as_object_mut().unwrap().remove("wall_clock_ms");
                v
            };
            if strip(&a) != strip(&b) {
                return (false, format!("{name} differs beyond wall clock"));
            }
        } else if a != b {
            return (false, format!("{name} differs between runs"));
        }
        compared += 1;
    }
    (
        true,
        format!("{compared} output files byte-identical across repeated pipelines"),
    )
}
