//! Approximate posteriors over network weights: full-batch HMC, SGHMC,
//! deep ensembles and the linearized Laplace approximation.

mod ensemble;
mod hmc;
mod lla;
mod map;
mod sghmc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::mlp::{mlp_forward, MlpSpec, ParamVector};
use crate::numkit::{standard_normal, Matrix, Rng};
use crate::surrogate::PosteriorDraws;
use crate::{Error, Result};

pub use ensemble::{ensemble_fit, EnsembleConfig};
pub use hmc::{hamiltonian_error, hmc_sample, HmcConfig};
pub use lla::{lla_fit, LlaConfig, LlaState};
pub use map::{map_fit, MapConfig};
pub use sghmc::{curvature_bound, sghmc_sample, SghmcConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerDiagnostics {
    pub accept_rate: f64,
    pub divergences: usize,
    pub proposals: usize,
    pub step_size: f64,
    /// Members that failed to train (ensembles only).
    pub failed_members: usize,
}

/// Weight samples (chain states or ensemble members) for one architecture.
#[derive(Clone, Debug)]
pub struct WeightPosterior {
    pub spec: MlpSpec,
    pub samples: Vec<ParamVector>,
    pub diagnostics: SamplerDiagnostics,
}

impl WeightPosterior {
    pub fn new(spec: MlpSpec, samples: Vec<ParamVector>, diagnostics: SamplerDiagnostics) -> Result<Self> {
        let p = spec.num_params();
        if samples.is_empty() {
            return Err(Error::FitFailed("posterior has no samples".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != p) {
            return Err(Error::DimensionMismatch(format!("sample of length {} for {p} parameters", bad.len())));
        }
        Ok(WeightPosterior { spec, samples, diagnostics })
    }

    /// Network outputs of every sample at `xq`, one q×m matrix per sample.
    pub fn member_outputs(&self, xq: &Matrix) -> Result<Vec<Matrix>> {
        self.samples.iter().map(|p| mlp_forward(&self.spec, p, xq)).collect()
    }

    /// Draws whose sample indices are given explicitly; each distinct
    /// network is evaluated once.
    pub fn draws_for_indices(&self, xq: &Matrix, indices: &[usize]) -> Result<PosteriorDraws> {
        let (q, m) = (xq.rows(), self.spec.output_dim);
        let mut cache: Vec<Option<Matrix>> = vec![None; self.samples.len()];
        let mut out = PosteriorDraws::zeros(indices.len(), q, m);
        for (s, &idx) in indices.iter().enumerate() {
            if cache[idx].is_none() {
                cache[idx] = Some(mlp_forward(&self.spec, &self.samples[idx], xq)?);
            }
            let h = cache[idx].as_ref().expect("filled above");
            for j in 0..q {
                for k in 0..m {
                    out.set(s, j, k, h[(j, k)]);
                }
            }
        }
        Ok(out)
    }
}

/// Posterior-predictive draws: each draw picks a weight sample uniformly at
/// random and evaluates the network, optionally adding observation noise.
pub fn predictive_draws(
    posterior: &WeightPosterior,
    xq: &Matrix,
    count: usize,
    include_noise: bool,
    rng: &mut Rng,
) -> Result<PosteriorDraws> {
    let m = posterior.samples.len();
    let indices: Vec<usize> = (0..count).map(|_| rng.random_range(0..m)).collect();
    let mut draws = posterior.draws_for_indices(xq, &indices)?;
    if include_noise {
        let sd = posterior.spec.likelihood_variance.sqrt();
        for s in 0..count {
            for j in 0..xq.rows() {
                for k in 0..posterior.spec.output_dim {
                    let v = draws.get(s, j, k) + sd * standard_normal(rng);
                    draws.set(s, j, k, v);
                }
            }
        }
    }
    Ok(draws)
}

/// Rows of `x`/`y` selected by `idx`.
pub(crate) fn subset(x: &Matrix, y: &Matrix, idx: &[usize]) -> (Matrix, Matrix) {
    (x.select_rows(idx), y.select_rows(idx))
}

pub(crate) fn check_data(spec: &MlpSpec, x: &Matrix, y: &Matrix) -> Result<()> {
    spec.validate()?;
    if x.rows() == 0 || x.rows() != y.rows() || x.cols() != spec.input_dim || y.cols() != spec.output_dim {
        return Err(Error::DimensionMismatch(format!(
            "data {:?} / {:?} for a {}-input, {}-output network",
            x.shape(),
            y.shape(),
            spec.input_dim,
            spec.output_dim
        )));
    }
    Ok(())
}
