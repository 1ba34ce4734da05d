use std::time::Instant;

use bnnbo_core::acquisition::{optimize_acq, AcqContext, AcquisitionRegistry, ParetoState};
use bnnbo_core::numkit::{mix_seed, rng_from_seed, sobol_points_or_lhs, Matrix, Rng};
use bnnbo_core::problems::{build_problem, Problem};
use bnnbo_core::surrogate::{fit, Dataset};
use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use crate::config::BoConfig;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// The surrogate or acquisition failed and the batch was drawn at random.
    pub fallback: bool,
    pub error: Option<String>,
    /// Marginal log-likelihood per objective, for GP-family surrogates.
    pub mll: Option<Vec<f64>>,
    pub fit_seconds: f64,
    pub acquisition_seconds: f64,
}

/// One batch of evaluations; iteration 0 is the initial design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    /// Cumulative evaluations after this batch.
    pub evals: usize,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    /// Best value so far, or dominated hypervolume for several objectives.
    pub best: f64,
    pub fit: Option<FitDiagnostics>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub rows: Vec<IterationRow>,
    /// Best value (or hypervolume) after each single evaluation.
    pub trace: Vec<f64>,
}

impl TrialRecord {
    pub fn final_best(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn fallbacks(&self) -> usize {
        self.rows.iter().filter(|r| r.fit.as_ref().is_some_and(|f| f.fallback)).count()
    }
}

/// Running best value or Pareto front.
pub enum Progress {
    Best(f64),
    Front(ParetoState),
}

impl Progress {
    pub fn for_problem(problem: &dyn Problem) -> Self {
        match &problem.info().reference {
            Some(r) if problem.info().objectives > 1 => Progress::Front(ParetoState::empty(r.clone())),
            _ => Progress::Best(f64::NEG_INFINITY),
        }
    }

    pub fn update(&mut self, y: &[f64]) -> f64 {
        match self {
            Progress::Best(b) => {
                *b = b.max(y[0]);
                *b
            }
            Progress::Front(front) => {
                front.insert(y);
                front.hypervolume()
            }
        }
    }
}

/// Seed of trial `trial` under a master seed.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    mix_seed(master, trial as u64)
}

fn scale(unit: &Matrix, bounds: &[(f64, f64)]) -> Matrix {
    Matrix::from_fn(unit.rows(), unit.cols(), |i, j| {
        let (lo, hi) = bounds[j];
        (lo + unit[(i, j)] * (hi - lo)).clamp(lo, hi)
    })
}

fn random_batch(q: usize, bounds: &[(f64, f64)], rng: &mut Rng) -> Matrix {
    Matrix::from_fn(q, bounds.len(), |_, j| {
        let (lo, hi) = bounds[j];
        lo + rng.random::<f64>() * (hi - lo)
    })
}

/// Fit, then maximize the acquisition; timings are (fit, acquisition).
fn propose(cfg: &BoConfig, data: &Dataset, problem: &dyn Problem, q: usize, seed: u64) -> (Result<(Matrix, Option<Vec<f64>>)>, f64, f64) {
    let mut rng = rng_from_seed(seed);
    let start = Instant::now();
    let fitted = match fit(&cfg.surrogate, data, &mut rng) {
        Ok(f) => f,
        Err(e) => return (Err(e.into()), start.elapsed().as_secs_f64(), 0.0),
    };
    let fit_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let ctx = AcqContext { observed: &data.y, reference: problem.info().reference.as_deref() };
    let result = AcquisitionRegistry::global()
        .build(&cfg.acquisition.kind, &ctx)
        .and_then(|acq| optimize_acq(&fitted, acq.as_ref(), &cfg.acquisition, q, &problem.info().bounds, &mut rng))
        .map(|x| (x, fitted.mll()))
        .map_err(Into::into);
    (result, fit_seconds, start.elapsed().as_secs_f64())
}

/// Runs one BO trial, handing each row to `sink` as soon as it is complete.
pub fn run_trial_streaming(cfg: &BoConfig, trial: usize, sink: &mut dyn FnMut(&IterationRow) -> Result<()>) -> Result<TrialRecord> {
    cfg.validate()?;
    let problem = build_problem(&cfg.problem)?;
    let info = problem.info();
    let bounds = info.bounds.clone();
    let seed = trial_seed(cfg.run.seed, trial);
    let mut rng = rng_from_seed(seed);
    let mut data = Dataset::new(bounds.clone(), info.objectives)?;
    let mut progress = Progress::for_problem(problem.as_ref());
    let mut trace = Vec::with_capacity(cfg.run.max_evals);
    let mut rows = Vec::new();

    let mut evaluate = |x: &Matrix, data: &mut Dataset, trace: &mut Vec<f64>| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut inputs = Vec::with_capacity(x.rows());
        let mut outputs = Vec::with_capacity(x.rows());
        for xi in x.row_iter() {
            let y = problem.evaluate(xi)?;
            trace.push(progress.update(&y));
            data.push(xi, &y);
            inputs.push(xi.to_vec());
            outputs.push(y);
        }
        Ok((inputs, outputs))
    };

    let start = Instant::now();
    let design = scale(&sobol_points_or_lhs(bounds.len(), cfg.run.n_init, rng.next_u64() | 1).points, &bounds);
    let (inputs, outputs) = evaluate(&design, &mut data, &mut trace)?;
    let row = IterationRow {
        iteration: 0,
        evals: data.len(),
        inputs,
        outputs,
        best: *trace.last().expect("n_init >= 1"),
        fit: None,
        seconds: start.elapsed().as_secs_f64(),
    };
    sink(&row)?;
    rows.push(row);

    let mut iteration = 0;
    while data.len() < cfg.run.max_evals {
        iteration += 1;
        let start = Instant::now();
        let q = cfg.run.batch.min(cfg.run.max_evals - data.len());
        let (propose_seed, fallback_seed) = (rng.next_u64(), rng.next_u64());
        let (proposal, fit_seconds, acquisition_seconds) = propose(cfg, &data, problem.as_ref(), q, propose_seed);
        let (x, diagnostics) = match proposal {
            Ok((x, mll)) => (x, FitDiagnostics { fallback: false, error: None, mll, fit_seconds, acquisition_seconds }),
            Err(e) => (
                random_batch(q, &bounds, &mut rng_from_seed(fallback_seed)),
                FitDiagnostics { fallback: true, error: Some(e.to_string()), mll: None, fit_seconds, acquisition_seconds },
            ),
        };
        let (inputs, outputs) = evaluate(&x, &mut data, &mut trace)?;
        let row = IterationRow {
            iteration,
            evals: data.len(),
            inputs,
            outputs,
            best: *trace.last().expect("nonempty"),
            fit: Some(diagnostics),
            seconds: start.elapsed().as_secs_f64(),
        };
        sink(&row)?;
        rows.push(row);
    }
    Ok(TrialRecord { trial, seed, rows, trace })
}

pub fn run_trial(cfg: &BoConfig, trial: usize) -> Result<TrialRecord> {
    run_trial_streaming(cfg, trial, &mut |_| Ok(()))
}
