//! Exact Gaussian-process regression with Matérn-5/2, i-BNN (NNGP) and
//! deep-kernel feature kernels.

mod dkl;
mod exact;
mod kernels;

pub use dkl::{dkl_fit, dkl_objective, feature_spec, DklConfig, DklState};
pub use exact::{
    gp_fit, gp_mll, gp_predict, gp_sample, matern_objective, FitDiagnostics, GammaPrior, GpOptConfig, GpPriorConfig,
    GpState, KernelChoice, MaternLayout, MaternValue,
};
pub use kernels::{matern52, matern52_profile, nngp_kernel, IbnnKernelSpec, Kernel, Matern52Hypers};
