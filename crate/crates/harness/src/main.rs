use std::path::PathBuf;
use std::process::ExitCode;

use bnnbo_core::problems::ProblemRegistry;
use bnnbo_harness::checks::{run_check, CHECKS, QUICK};
use bnnbo_harness::config::{BoConfig, RunConfig, SweepConfig};
use bnnbo_harness::{presets, resolve_out_dir, run_experiment, sensitivity_sweep, write_sweep, HarnessError, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bnnbo", about = "Bayesian optimization with Bayesian-neural-network surrogates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-trial BO experiment.
    Run(RunArgs),
    /// Run an architecture sensitivity sweep.
    Sweep(RunArgs),
    /// List the benchmark problems.
    Problems,
    /// Run the oracle check suite.
    Selftest {
        /// Include the slow end-to-end checks.
        #[arg(long)]
        full: bool,
        /// Run only the given check ids.
        #[arg(long = "check", value_name = "ID")]
        checks: Vec<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset name instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: $BNNBO_OUT_DIR, then ./results).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn apply(&self, run: &mut RunConfig) {
        if let Some(seed) = self.seed {
            run.seed = seed;
        }
        if let Some(trials) = self.trials {
            run.trials = trials;
        }
        if let Some(threads) = self.threads {
            run.threads = threads;
        }
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => BoConfig::load(path)?,
        (None, Some(name)) => presets::experiment(name)?,
        (None, None) => return Err(HarnessError::config("config", "pass --config or --preset")),
    };
    args.apply(&mut cfg.run);
    cfg.validate()?;
    let out = resolve_out_dir(args.out.clone());
    let result = run_experiment(&cfg, &out)?;
    for record in &result.records {
        println!(
            "trial {} (seed {}): best {:.6} after {} evals, {} fallback iterations",
            record.trial,
            record.seed,
            record.final_best(),
            cfg.run.max_evals,
            record.fallbacks()
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn sweep(args: &RunArgs) -> Result<()> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => SweepConfig::load(path)?,
        (None, Some(name)) => presets::sweep(name)?,
        (None, None) => return Err(HarnessError::config("config", "pass --config or --preset")),
    };
    args.apply(&mut cfg.run);
    cfg.validate()?;
    let out = resolve_out_dir(args.out.clone());
    let result = sensitivity_sweep(&cfg)?;
    write_sweep(&result, &out)?;
    for (cell, error) in result.failures() {
        eprintln!("cell {cell} failed: {error}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn selftest(full: bool, only: &[usize]) -> Result<()> {
    if let Some(bad) = only.iter().find(|id| !CHECKS.iter().any(|c| c.0 == **id)) {
        return Err(HarnessError::config("check", format!("no check with id {bad} (1 to {})", CHECKS.len())));
    }
    let ids: Vec<usize> = match (only.is_empty(), full) {
        (false, _) => only.to_vec(),
        (true, true) => CHECKS.iter().map(|c| c.0).collect(),
        (true, false) => QUICK.to_vec(),
    };
    let mut failed = 0;
    for id in ids {
        let check = run_check(id);
        println!("{check}");
        if !check.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(HarnessError::Runtime(format!("{failed} checks failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Problems => {
            for (name, description) in ProblemRegistry::global().describe() {
                println!("{name:<16} {description}");
            }
            Ok(())
        }
        Command::Selftest { full, checks } => selftest(*full, checks),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
