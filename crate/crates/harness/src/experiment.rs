use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::BoConfig;
use crate::error::{HarnessError, Result};
use crate::trial::{run_trial_streaming, TrialRecord};

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "BNNBO_OUT_DIR";

/// The `--out` flag, else `$BNNBO_OUT_DIR`, else `results`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("results"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub evals: usize,
    pub mean_best: f64,
    /// Standard error of the mean across trials; zero for a single trial.
    pub stderr_best: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub label: String,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn final_bests(&self) -> Vec<f64> {
        self.records.iter().map(TrialRecord::final_best).collect()
    }
}

/// Mean and standard error of the running best at every evaluation count.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let len = records.iter().map(|r| r.trace.len()).min().unwrap_or(0);
    let n = records.len() as f64;
    (0..len)
        .map(|e| {
            let values: Vec<f64> = records.iter().map(|r| r.trace[e]).collect();
            let mean = values.iter().sum::<f64>() / n;
            let stderr = if records.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                0.0
            };
            SummaryRow { evals: e + 1, mean_best: mean, stderr_best: stderr }
        })
        .collect()
}

pub fn write_summary_csv(path: &Path, label: &str, rows: &[SummaryRow]) -> Result<()> {
    let io = |e| HarnessError::io(format!("writing {}", path.display()), e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "evals,mean_best,stderr_best,surrogate").map_err(io)?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.evals, r.mean_best, r.stderr_best, label).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn trial_path(out_dir: &Path, trial: usize) -> PathBuf {
    out_dir.join(format!("trial_{trial}.jsonl"))
}

/// Runs one trial, appending each iteration to its JSONL file as it finishes.
fn run_logged_trial(cfg: &BoConfig, trial: usize, out_dir: &Path) -> Result<TrialRecord> {
    let path = trial_path(out_dir, trial);
    let io = |e| HarnessError::io(format!("writing {}", path.display()), e);
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    run_trial_streaming(cfg, trial, &mut |row| {
        serde_json::to_writer(&mut w, row).map_err(|e| HarnessError::io(format!("writing {}", path.display()), e.into()))?;
        w.write_all(b"\n").map_err(io)?;
        w.flush().map_err(io)
    })
}

/// Runs every trial, writing `trial_<k>.jsonl`, `summary.csv` and the
/// resolved `config.toml` under `out_dir`.
pub fn run_experiment(cfg: &BoConfig, out_dir: &Path) -> Result<ExperimentResult> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(format!("creating {}", out_dir.display()), e))?;
    let config_path = out_dir.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml_string())
        .map_err(|e| HarnessError::io(format!("writing {}", config_path.display()), e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<TrialRecord>> =
        pool.install(|| (0..cfg.run.trials).into_par_iter().map(|t| run_logged_trial(cfg, t, out_dir)).collect());
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let label = cfg.surrogate.label().to_string();
    let summary = summarize(&records);
    write_summary_csv(&out_dir.join("summary.csv"), &label, &summary)?;
    Ok(ExperimentResult { label, records, summary })
}
