//! Fit on observed data, emit joint posterior draws at candidate points.

mod base;
mod config;
mod data;
mod draws;
mod fitted;
mod model;
mod registry;

pub use base::BaseSamples;
pub use config::{IbnnConfig, NetworkConfig, SurrogateConfig};
pub use data::{normalize, Dataset, Transform};
pub use draws::PosteriorDraws;
pub use fitted::{fit, fit_with, FittedSurrogate, RawScorer};
pub use model::{DrawScorer, GpFamily, LatentGp, LlaHead, PosteriorModel};
pub use registry::{Surrogate, SurrogateRegistry};
