use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::RngCore;
use rayon::prelude::*;

use crate::bnn::{ensemble_fit, hmc_sample, lla_fit, sghmc_sample};
use crate::gp::{dkl_fit, gp_fit, KernelChoice};
use crate::numkit::{rng_from_seed, Matrix, Rng};
use crate::{Error, Result};

use super::model::{GpFamily, LatentGp, LlaHead, PosteriorModel};
use super::SurrogateConfig;

/// A surrogate strategy: fits a posterior on unit-cube inputs and
/// standardized outputs.
pub trait Surrogate: Send + Sync {
    fn name(&self) -> &'static str;

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>>;
}

/// Surrogates addressable by name.
#[derive(Clone, Default)]
pub struct SurrogateRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Surrogate>>,
}

impl SurrogateRegistry {
    pub fn builtin() -> Self {
        let mut r = SurrogateRegistry::default();
        r.register(Arc::new(MaternGp));
        r.register(Arc::new(InfiniteBnn));
        r.register(Arc::new(DeepKernel));
        r.register(Arc::new(Hmc));
        r.register(Arc::new(Sghmc));
        r.register(Arc::new(Ensemble));
        r.register(Arc::new(Laplace));
        r
    }

    /// Shared instance of [`SurrogateRegistry::builtin`].
    pub fn global() -> &'static SurrogateRegistry {
        static REGISTRY: OnceLock<SurrogateRegistry> = OnceLock::new();
        REGISTRY.get_or_init(SurrogateRegistry::builtin)
    }

    pub fn register(&mut self, surrogate: Arc<dyn Surrogate>) {
        self.entries.insert(surrogate.name(), surrogate);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Surrogate> {
        self.entries.get(name).map(|s| s.as_ref()).ok_or_else(|| Error::UnknownName {
            kind: "surrogate",
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Fits `fit_one` to every objective column with its own seeded stream.
fn per_objective<F>(y: &Matrix, rng: &mut Rng, fit_one: F) -> Result<Box<dyn PosteriorModel>>
where
    F: Fn(&[f64], &mut Rng) -> Result<Box<dyn LatentGp>> + Sync,
{
    let seeds: Vec<u64> = (0..y.cols()).map(|_| rng.next_u64()).collect();
    let heads = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| fit_one(&y.column(k), &mut rng_from_seed(seed)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Box::new(GpFamily { heads }))
}

struct MaternGp;

impl Surrogate for MaternGp {
    fn name(&self) -> &'static str {
        "gp"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        per_objective(y, rng, |yk, rng| {
            Ok(Box::new(gp_fit(&KernelChoice::Matern52, x, yk, &cfg.gp_prior, &cfg.gp, rng)?) as Box<dyn LatentGp>)
        })
    }
}

struct InfiniteBnn;

impl Surrogate for InfiniteBnn {
    fn name(&self) -> &'static str {
        "ibnn"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        let kernel = KernelChoice::Nngp { spec: cfg.ibnn.kernel, noise: cfg.ibnn.noise };
        per_objective(y, rng, |yk, rng| {
            Ok(Box::new(gp_fit(&kernel, x, yk, &cfg.gp_prior, &cfg.gp, rng)?) as Box<dyn LatentGp>)
        })
    }
}

struct DeepKernel;

impl Surrogate for DeepKernel {
    fn name(&self) -> &'static str {
        "dkl"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        let spec = cfg.network.spec(x.cols(), 1);
        per_objective(y, rng, |yk, rng| {
            Ok(Box::new(dkl_fit(&spec, x, yk, &cfg.gp_prior, &cfg.dkl, rng)?) as Box<dyn LatentGp>)
        })
    }
}

struct Laplace;

impl Surrogate for Laplace {
    fn name(&self) -> &'static str {
        "lla"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        let spec = cfg.network.spec(x.cols(), 1);
        per_objective(y, rng, |yk, rng| {
            let yk = Matrix::column_vector(yk);
            let state = Arc::new(lla_fit(&spec, x, &yk, &cfg.lla, rng)?);
            Ok(Box::new(LlaHead { state, output: 0 }) as Box<dyn LatentGp>)
        })
    }
}

struct Hmc;

impl Surrogate for Hmc {
    fn name(&self) -> &'static str {
        "hmc"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        Ok(Box::new(hmc_sample(&cfg.network.spec(x.cols(), y.cols()), x, y, &cfg.hmc, rng)?))
    }
}

struct Sghmc;

impl Surrogate for Sghmc {
    fn name(&self) -> &'static str {
        "sghmc"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        Ok(Box::new(sghmc_sample(&cfg.network.spec(x.cols(), y.cols()), x, y, &cfg.sghmc, rng)?))
    }
}

struct Ensemble;

impl Surrogate for Ensemble {
    fn name(&self) -> &'static str {
        "ensemble"
    }

    fn fit(&self, cfg: &SurrogateConfig, x: &Matrix, y: &Matrix, rng: &mut Rng) -> Result<Box<dyn PosteriorModel>> {
        Ok(Box::new(ensemble_fit(&cfg.network.spec(x.cols(), y.cols()), x, y, &cfg.ensemble, rng)?))
    }
}
