use rand::seq::index::sample as sample_indices;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mlp::{mlp_init, MlpSpec};
use crate::numkit::{rng_from_seed, Matrix, Rng};
use crate::{Error, Result};

use super::map::{map_fit, MapConfig};
use super::{check_data, subset, SamplerDiagnostics, WeightPosterior};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_models: usize,
    pub subset_fraction: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { n_models: 10, subset_fraction: 0.8, iterations: 1000, learning_rate: 1e-2 }
    }
}

/// Independent MAP fits on random data subsets, each from its own prior draw.
pub fn ensemble_fit(spec: &MlpSpec, x: &Matrix, y: &Matrix, cfg: &EnsembleConfig, rng: &mut Rng) -> Result<WeightPosterior> {
    check_data(spec, x, y)?;
    if cfg.n_models == 0 || !(cfg.subset_fraction > 0.0 && cfg.subset_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "ensemble needs n_models >= 1 and subset_fraction in (0, 1], got {} and {}",
            cfg.n_models, cfg.subset_fraction
        )));
    }
    let n = x.rows();
    let keep = ((cfg.subset_fraction * n as f64).ceil() as usize).clamp(1, n);
    let map = MapConfig { iterations: cfg.iterations, learning_rate: cfg.learning_rate };
    let seeds: Vec<u64> = (0..cfg.n_models).map(|_| rng.next_u64()).collect();
    let members: Vec<Result<_>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut member_rng = rng_from_seed(seed);
            let mut idx = sample_indices(&mut member_rng, n, keep).into_vec();
            idx.sort_unstable();
            let (xs, ys) = subset(x, y, &idx);
            let init = mlp_init(spec, &mut member_rng);
            map_fit(spec, &xs, &ys, init, &map)
        })
        .collect();
    let failed = members.iter().filter(|m| m.is_err()).count();
    let samples: Vec<_> = members.into_iter().filter_map(Result::ok).collect();
    let needed = cfg.n_models.min(2);
    if samples.len() < needed {
        return Err(Error::FitFailed(format!("only {} of {} ensemble members trained", samples.len(), cfg.n_models)));
    }
    let diagnostics = SamplerDiagnostics { failed_members: failed, accept_rate: 1.0, ..Default::default() };
    WeightPosterior::new(spec.clone(), samples, diagnostics)
}
