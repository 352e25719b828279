//! Command-line driver: run single points, parameter sweeps, validation
//! against exact diagonalization, and entanglement analysis.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure,
//! 3 i/o error.

use clap::{Parser, Subcommand};
use spinmc::runner::{self, AnalyzeOptions, RunConfig, RunnerError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spinmc", version, about = "SSE quantum Monte Carlo for XXZ and transverse-field Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of chains.
    #[arg(long)]
    chains: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the checkpoint interval (measurement sweeps).
    #[arg(long)]
    checkpoint_every: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single parameter point.
    Run(ConfigArgs),
    /// Run every value of the configured sweep axis.
    Sweep(ConfigArgs),
    /// Resume an interrupted run or sweep from its checkpoints.
    Resume(ConfigArgs),
    /// Compare Monte Carlo estimates against exact diagonalization.
    Validate(ConfigArgs),
    /// Post-process bin dumps into entanglement tables.
    Analyze {
        /// Point directory containing chain_*.bins.tsv.
        #[arg(long)]
        point: PathBuf,
        /// Output table path (default: <point>/entanglement.tsv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reconstruct symmetry-broken singles from the staggered
        /// magnetization.
        #[arg(long)]
        broken_symmetry: bool,
        /// Presentation multiplier on concurrence columns.
        #[arg(long, default_value_t = 1.0)]
        d_factor: f64,
        /// Also report the PSD-projected concurrence.
        #[arg(long)]
        psd_project: bool,
    },
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(c) = args.chains {
        cfg.chains = c;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = o.display().to_string();
    }
    if let Some(k) = args.checkpoint_every {
        cfg.checkpoint_every = k;
    }
    Ok(cfg)
}

const EXIT_CONFIG: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_for(err: &RunnerError) -> u8 {
    match err {
        RunnerError::Config(_) | RunnerError::Analysis(_) => EXIT_CONFIG,
        RunnerError::File(_) | RunnerError::Checkpoint(_) | RunnerError::Io(_, _) => EXIT_IO,
        RunnerError::Oracle(_) => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err((msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, (String, u8)> {
    match cli.command {
        // A config carrying an [axis] section runs as a sweep.
        Command::Run(args) => match load_config(&args).map(|c| c.axis.is_some()) {
            Ok(true) => sweep_cmd(&args, false),
            Ok(false) => point_cmd(&args, false),
            Err(e) => Err((e, EXIT_CONFIG)),
        },
        Command::Resume(args) => match load_config(&args).map(|c| c.axis.is_some()) {
            Ok(true) => sweep_cmd(&args, true),
            Ok(false) => point_cmd(&args, true),
            Err(e) => Err((e, EXIT_CONFIG)),
        },
        Command::Sweep(args) => sweep_cmd(&args, false),
        Command::Validate(args) => {
            let cfg = load_config(&args).map_err(|e| (e, EXIT_CONFIG))?;
            let (rows, pass) =
                runner::validate_point(&cfg).map_err(|e| (e.to_string(), exit_for(&e)))?;
            for r in &rows {
                println!(
                    "{}\tmc {:.6} +/- {:.6}\texact {:.6}\tz {:.2}",
                    r.name, r.mc.value, r.mc.sigma, r.exact, r.z
                );
            }
            if pass {
                println!("validate: PASS ({} channels)", rows.len());
                Ok(ExitCode::SUCCESS)
            } else {
                let worst = runner::validate::worst_channel(&rows).unwrap();
                println!(
                    "validate: FAIL ({} at z = {:.2})",
                    worst.name, worst.z
                );
                Ok(ExitCode::from(EXIT_VALIDATION))
            }
        }
        Command::Analyze {
            point,
            out,
            broken_symmetry,
            d_factor,
            psd_project,
        } => {
            let opts = AnalyzeOptions {
                broken_symmetry,
                d_factor,
                psd_project,
            };
            let (header, reports) = runner::analyze_point(&point, &opts)
                .map_err(|e| (e.to_string(), exit_for(&e)))?;
            let out = out.unwrap_or_else(|| point.join("entanglement.tsv"));
            runner::analyze::write_analysis_table(&out, &header, &reports, &opts)
                .map_err(|e| (e.to_string(), exit_for(&e)))?;
            for r in &reports {
                println!(
                    "sep ({},{}): C_F {:.4} +/- {:.4}  E_F {:.4} +/- {:.4}  C_A {:.4} +/- {:.4}  E_L in [{:.4}, {:.4}]",
                    r.sep.dx, r.sep.dy, r.cf.value, r.cf.sigma, r.ef.value, r.ef.sigma,
                    r.ca.value, r.ca.sigma, r.el_lower.value, r.el_upper.value
                );
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn point_cmd(args: &ConfigArgs, resume: bool) -> Result<ExitCode, (String, u8)> {
    let cfg = load_config(args).map_err(|e| (e, EXIT_CONFIG))?;
    let out = runner::run_point(&cfg, resume).map_err(|e| (e.to_string(), exit_for(&e)))?;
    println!("point finished: {}", out.dir.display());
    for (name, est) in out.summary.iter().take(8) {
        println!("  {name}\t{est}");
    }
    if out.summary.len() > 8 {
        println!("  ... {} observables in summary.tsv", out.summary.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_cmd(args: &ConfigArgs, resume: bool) -> Result<ExitCode, (String, u8)> {
    let cfg = load_config(args).map_err(|e| (e, EXIT_CONFIG))?;
    let points = runner::run_sweep(&cfg, resume).map_err(|e| (e.to_string(), exit_for(&e)))?;
    println!("sweep finished: {} points", points.len());
    for (v, dir) in &points {
        println!("  {v}\t{}", dir.display());
    }
    Ok(ExitCode::SUCCESS)
}
