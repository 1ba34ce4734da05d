//! Monte-Carlo acquisition functions, Pareto bookkeeping and batch selection.

mod functions;
mod optimize;
mod pareto;

pub use functions::{
    mc_hvi, qei, AcqContext, Acquisition, AcquisitionFactory, AcquisitionRegistry, CandidateScore,
    ExpectedImprovement, HypervolumeImprovement,
};
pub use optimize::{optimize_acq, AcqConfig};
pub use pareto::{dominates, hypervolume, hypervolume_2d, hypervolume_wfg, pareto_front, weakly_dominates, ParetoState};
