use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bnnbo_core::numkit::{rng_from_seed, Matrix};
use bnnbo_core::surrogate::{fit, Dataset, SurrogateConfig};
use rayon::prelude::*;

use crate::config::{BoConfig, SweepConfig, SweepGroup, SweepMode};
use crate::error::{HarnessError, Result};
use crate::experiment::summarize;
use crate::trial::run_trial;

/// Query locations of the one-dimensional sweep toy on [0, 1].
pub const TOY_POINTS: [f64; 4] = [0.1, 0.35, 0.6, 0.9];

/// Posterior draws used for the mean and standard deviation of a cell.
const MOMENT_DRAWS: usize = 512;

pub fn toy_1d(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin() + 0.5 * x
}

/// One setting of one swept factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub group: SweepGroup,
    pub value: String,
    pub surrogate: SurrogateConfig,
}

/// Every one-factor-at-a-time variation of the base surrogate.
pub fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let base = &cfg.surrogate;
    let depth = base.network.hidden_widths.len().max(1);
    let width = base.network.hidden_widths.first().copied().unwrap_or(128);
    let mut out = Vec::new();
    for &group in &cfg.sweep.groups {
        let mut push = |value: String, edit: &dyn Fn(&mut SurrogateConfig)| {
            let mut s = base.clone();
            edit(&mut s);
            out.push(Cell { group, value, surrogate: s });
        };
        match group {
            SweepGroup::LikelihoodVariance => {
                for &v in &cfg.sweep.likelihood_variance {
                    push(v.to_string(), &|s| s.network.likelihood_variance = v);
                }
            }
            SweepGroup::PriorVariance => {
                for &v in &cfg.sweep.prior_variance {
                    push(v.to_string(), &|s| s.network.prior_variance = v);
                }
            }
            SweepGroup::Depth => {
                for &d in &cfg.sweep.depth {
                    push(d.to_string(), &|s| s.network.hidden_widths = vec![width; d]);
                }
            }
            SweepGroup::Width => {
                for &w in &cfg.sweep.width {
                    push(w.to_string(), &|s| s.network.hidden_widths = vec![w; depth]);
                }
            }
            SweepGroup::Activation => {
                for &a in &cfg.sweep.activation {
                    push(a.name().to_string(), &|s| s.network.activation = a);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorCurve {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// `draws[k][i]` is function draw `k` at `x[i]`.
    pub draws: Vec<Vec<f64>>,
    /// Average predictive std over the middle half of each gap between data.
    pub between_std: f64,
}

#[derive(Clone, Debug)]
pub struct CellOutcome<T> {
    pub cell: Cell,
    pub result: std::result::Result<T, String>,
}

/// Grid indices lying in the middle half of a gap between sorted data points.
pub fn between_mask(grid: &[f64], data: &[f64]) -> Vec<bool> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&x| {
            sorted.windows(2).any(|w| {
                let quarter = 0.25 * (w[1] - w[0]);
                x >= w[0] + quarter && x <= w[1] - quarter
            })
        })
        .collect()
}

/// Fits the cell's surrogate to the toy data and summarizes its posterior.
pub fn posterior_curve(surrogate: &SurrogateConfig, grid_points: usize, draws: usize, seed: u64) -> Result<PosteriorCurve> {
    let mut rng = rng_from_seed(seed);
    let mut data = Dataset::new(vec![(0.0, 1.0)], 1)?;
    for x in TOY_POINTS {
        data.push(&[x], &[toy_1d(x)]);
    }
    let fitted = fit(surrogate, &data, &mut rng)?;
    let x: Vec<f64> = (0..grid_points).map(|i| i as f64 / (grid_points - 1) as f64).collect();
    let xq = Matrix::from_vec(grid_points, 1, x.clone());
    let moments = fitted.draws(&xq, MOMENT_DRAWS, &mut rng)?;
    let mean = moments.mean().column(0);
    let std: Vec<f64> = (0..grid_points)
        .map(|i| {
            let ss: f64 = (0..MOMENT_DRAWS).map(|s| (moments.get(s, i, 0) - mean[i]).powi(2)).sum();
            (ss / (MOMENT_DRAWS - 1) as f64).sqrt()
        })
        .collect();
    let shown = if draws > 0 { Some(fitted.draws(&xq, draws, &mut rng)?) } else { None };
    let draws = shown.map_or_else(Vec::new, |d| (0..draws).map(|s| (0..grid_points).map(|i| d.get(s, i, 0)).collect()).collect());
    let mask = between_mask(&x, &TOY_POINTS);
    let inside: Vec<f64> = std.iter().zip(&mask).filter(|(_, &m)| m).map(|(s, _)| *s).collect();
    let between_std = inside.iter().sum::<f64>() / inside.len().max(1) as f64;
    Ok(PosteriorCurve { x, mean, std, draws, between_std })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardCell {
    pub final_best: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

pub fn reward_cell(cfg: &SweepConfig, surrogate: &SurrogateConfig) -> Result<RewardCell> {
    let problem = cfg.problem.clone().ok_or_else(|| HarnessError::config("problem", "reward sweeps need a problem"))?;
    let bo = BoConfig { problem, surrogate: surrogate.clone(), acquisition: cfg.acquisition.clone(), run: cfg.run.clone() };
    let records = (0..cfg.run.trials).map(|t| run_trial(&bo, t)).collect::<Result<Vec<_>>>()?;
    let last = summarize(&records).pop().ok_or_else(|| HarnessError::Runtime("empty trial".into()))?;
    Ok(RewardCell { final_best: records.iter().map(|r| r.final_best()).collect(), mean: last.mean_best, stderr: last.stderr_best })
}

pub enum SweepResult {
    Posterior(Vec<CellOutcome<PosteriorCurve>>),
    Reward(Vec<CellOutcome<RewardCell>>),
}

impl SweepResult {
    pub fn failures(&self) -> Vec<(String, String)> {
        fn collect<T>(v: &[CellOutcome<T>]) -> Vec<(String, String)> {
            v.iter()
                .filter_map(|c| c.result.as_ref().err().map(|e| (format!("{}={}", c.cell.group.name(), c.cell.value), e.clone())))
                .collect()
        }
        match self {
            SweepResult::Posterior(v) => collect(v),
            SweepResult::Reward(v) => collect(v),
        }
    }
}

/// Runs every cell; a failing cell is recorded and the sweep moves on.
pub fn sensitivity_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| HarnessError::Runtime(format!("thread pool: {e}")))?;
    let all = cells(cfg);
    Ok(pool.install(|| match cfg.sweep.mode {
        SweepMode::Posterior => SweepResult::Posterior(
            all.into_par_iter()
                .map(|cell| {
                    let result = posterior_curve(&cell.surrogate, cfg.sweep.grid_points, cfg.sweep.draws, cfg.run.seed)
                        .map_err(|e| e.to_string());
                    CellOutcome { cell, result }
                })
                .collect(),
        ),
        SweepMode::Reward => SweepResult::Reward(
            all.into_par_iter()
                .map(|cell| {
                    let result = reward_cell(cfg, &cell.surrogate).map_err(|e| e.to_string());
                    CellOutcome { cell, result }
                })
                .collect(),
        ),
    }))
}

/// Writes `sweep_curves.csv` or `sweep_rewards.csv` plus `sweep_summary.csv`.
pub fn write_sweep(result: &SweepResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(format!("creating {}", out_dir.display()), e))?;
    let open = |name: &str| -> Result<(BufWriter<File>, std::path::PathBuf)> {
        let path = out_dir.join(name);
        let f = File::create(&path).map_err(|e| HarnessError::io(format!("writing {}", path.display()), e))?;
        Ok((BufWriter::new(f), path))
    };
    let (mut detail, detail_path) = open(match result {
        SweepResult::Posterior(_) => "sweep_curves.csv",
        SweepResult::Reward(_) => "sweep_rewards.csv",
    })?;
    let (mut summary, summary_path) = open("sweep_summary.csv")?;
    let fd = |e| HarnessError::io(format!("writing {}", detail_path.display()), e);
    let fs = |e| HarnessError::io(format!("writing {}", summary_path.display()), e);
    match result {
        SweepResult::Posterior(outcomes) => {
            let draws = outcomes.iter().find_map(|c| c.result.as_ref().ok()).map_or(0, |c| c.draws.len());
            let header: Vec<String> = (0..draws).map(|k| format!(",draw_{k}")).collect();
            writeln!(detail, "group,value,x,mean,std{}", header.concat()).map_err(fd)?;
            writeln!(summary, "group,value,between_std,status").map_err(fs)?;
            for c in outcomes {
                let (group, value) = (c.cell.group.name(), &c.cell.value);
                match &c.result {
                    Ok(curve) => {
                        for i in 0..curve.x.len() {
                            write!(detail, "{group},{value},{},{},{}", curve.x[i], curve.mean[i], curve.std[i]).map_err(fd)?;
                            for d in &curve.draws {
                                write!(detail, ",{}", d[i]).map_err(fd)?;
                            }
                            writeln!(detail).map_err(fd)?;
                        }
                        writeln!(summary, "{group},{value},{},ok", curve.between_std).map_err(fs)?;
                    }
                    Err(_) => writeln!(summary, "{group},{value},,failed").map_err(fs)?,
                }
            }
        }
        SweepResult::Reward(outcomes) => {
            writeln!(detail, "group,value,trial,final_best").map_err(fd)?;
            writeln!(summary, "group,value,mean_best,stderr_best,status").map_err(fs)?;
            for c in outcomes {
                let (group, value) = (c.cell.group.name(), &c.cell.value);
                match &c.result {
                    Ok(r) => {
                        for (t, b) in r.final_best.iter().enumerate() {
                            writeln!(detail, "{group},{value},{t},{b}").map_err(fd)?;
                        }
                        writeln!(summary, "{group},{value},{},{},ok", r.mean, r.stderr).map_err(fs)?;
                    }
                    Err(_) => writeln!(summary, "{group},{value},,,failed").map_err(fs)?,
                }
            }
        }
    }
    detail.flush().map_err(fd)?;
    summary.flush().map_err(fs)
}
