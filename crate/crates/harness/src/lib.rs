//! Bayesian-optimization experiments: configuration, the BO loop, the
//! multi-trial runner, architecture sweeps and the oracle check suite.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod sweep;
pub mod trial;

pub use config::{BoConfig, RunConfig, SweepConfig, SweepGroup, SweepMode};
pub use error::{HarnessError, Result};
pub use experiment::{resolve_out_dir, run_experiment, summarize, ExperimentResult, SummaryRow};
pub use sweep::{sensitivity_sweep, write_sweep, SweepResult};
pub use trial::{run_trial, run_trial_streaming, FitDiagnostics, IterationRow, TrialRecord};
