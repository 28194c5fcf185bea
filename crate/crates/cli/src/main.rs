use anyhow::Result;
use clap::{Parser, Subcommand};
use fluidnet_cli::commands;
use fluidnet_cli::io::{load_config, parse_grid, parse_seeds};
use fluidnet_cli::ExitClass;
use std::path::PathBuf;
use std::process::ExitCode;

/// Two-node fluid network simulator and tail-bound toolkit.
#[derive(Parser)]
#[command(name = "fluidnet", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print derived model quantities, stability class, and per-direction
    /// coefficients.
    Derive {
        #[arg(long)]
        config: PathBuf,
        /// Also write derived.csv and directions.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded replications and write tails, summaries, and the manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed list: `1,2,5` or `1..8`.
        #[arg(long)]
        seeds: Option<String>,
        /// Cap the replication worker pool.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the tail grid: `log:1:200:24`, `lin:0.5:10:20`, or a
        /// comma list.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Join a finished run with the analytic bounds and emit verdicts.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Also write bounds.csv, asymptote.csv, and verdicts.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized equivalence suite for the drain-model oracle.
    Oracle {
        #[arg(long, default_value_t = 10_000)]
        tuples: u64,
        #[arg(long, default_value_t = 0xF1D0)]
        seed: u64,
    },
    /// Distribution-kernel diagnostics.
    Selfcheck {
        /// Include the configured jump distributions in the checks.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run() -> Result<ExitClass> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Derive { config, out } => {
            let cfg = load_config(&config)?;
            commands::cmd_derive(&cfg, out.as_deref())
        }
        Cmd::Simulate {
            config,
            out,
            seeds,
            workers,
            grid,
        } => {
            let cfg = load_config(&config)?;
            let seeds = seeds.as_deref().map(parse_seeds).transpose()?;
            let grid = grid.as_deref().map(parse_grid).transpose()?;
            let artifacts = commands::cmd_simulate(&cfg, &out, seeds, workers, grid)?;
            println!(
                "simulated {} seeds, {} events, residual {:.2e}, dominance {:?}",
                artifacts.manifest.seeds.len(),
                artifacts.manifest.summary.events,
                artifacts.manifest.summary.max_reflection_residual,
                artifacts.manifest.summary.dominance
            );
            Ok(artifacts.exit)
        }
        Cmd::Compare {
            config,
            manifest,
            out,
        } => {
            let cfg = load_config(&config)?;
            let (_verdicts, class) = commands::cmd_compare(&cfg, &manifest, out.as_deref())?;
            Ok(class)
        }
        Cmd::Oracle { tuples, seed } => {
            let (_verdicts, class) = commands::cmd_oracle(tuples, seed)?;
            Ok(class)
        }
        Cmd::Selfcheck { config } => {
            let cfg = config.as_deref().map(load_config).transpose()?;
            let (_verdicts, class) = commands::cmd_selfcheck(cfg.as_ref())?;
            Ok(class)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(class) => ExitCode::from(class.code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(ExitClass::Config.code())
        }
    }
}
