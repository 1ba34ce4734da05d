use crate::numkit::{Matrix, Rng};
use crate::{Error, Result};

use super::model::{DrawScorer, PosteriorModel};
use super::{normalize, BaseSamples, Dataset, PosteriorDraws, SurrogateConfig, SurrogateRegistry, Transform};

/// A posterior fitted on normalized data that answers queries in raw units.
pub struct FittedSurrogate {
    pub kind: String,
    pub transform: Transform,
    model: Box<dyn PosteriorModel>,
}

/// Fits the surrogate named by `cfg.kind` in the global registry.
pub fn fit(cfg: &SurrogateConfig, data: &Dataset, rng: &mut Rng) -> Result<FittedSurrogate> {
    fit_with(SurrogateRegistry::global(), cfg, data, rng)
}

pub fn fit_with(registry: &SurrogateRegistry, cfg: &SurrogateConfig, data: &Dataset, rng: &mut Rng) -> Result<FittedSurrogate> {
    let surrogate = registry.get(&cfg.kind)?;
    let (x, y, transform) = normalize(data)?;
    let model = surrogate
        .fit(cfg, &x, &y, rng)
        .map_err(|e| Error::Surrogate { kind: cfg.kind.clone(), source: Box::new(e) })?;
    Ok(FittedSurrogate { kind: cfg.kind.clone(), transform, model })
}

impl FittedSurrogate {
    pub fn new(kind: impl Into<String>, transform: Transform, model: Box<dyn PosteriorModel>) -> Self {
        FittedSurrogate { kind: kind.into(), transform, model }
    }

    pub fn model(&self) -> &dyn PosteriorModel {
        self.model.as_ref()
    }

    pub fn outputs(&self) -> usize {
        self.model.outputs()
    }

    /// Marginal log-likelihood of the standardized data per objective.
    pub fn mll(&self) -> Option<Vec<f64>> {
        self.model.mll()
    }

    /// `count` joint latent draws at raw inputs `xq`, in raw output units.
    pub fn draws(&self, xq: &Matrix, count: usize, rng: &mut Rng) -> Result<PosteriorDraws> {
        if count == 0 {
            return Err(Error::InvalidConfig("at least one posterior draw is required".into()));
        }
        let base = BaseSamples::iid(count, xq.rows(), self.outputs(), rng);
        let mut scorer = self.scorer(&base)?;
        let m = self.outputs();
        let mut out = PosteriorDraws::zeros(count, xq.rows(), m);
        for j in 0..xq.rows() {
            let f = scorer.commit(xq.row(j))?;
            for s in 0..count {
                for k in 0..m {
                    out.set(s, j, k, f[(s, k)]);
                }
            }
        }
        Ok(out)
    }

    /// Batch scorer in raw units driven by fixed base samples.
    pub fn scorer<'a>(&'a self, base: &'a BaseSamples) -> Result<RawScorer<'a>> {
        Ok(RawScorer { inner: self.model.scorer(base)?, transform: &self.transform })
    }
}

pub struct RawScorer<'a> {
    inner: Box<dyn DrawScorer + 'a>,
    transform: &'a Transform,
}

impl RawScorer<'_> {
    fn to_raw(&self, mut f: Matrix) -> Matrix {
        for s in 0..f.rows() {
            for (k, v) in f.row_mut(s).iter_mut().enumerate() {
                *v = self.transform.raw_output(*v, k);
            }
        }
        f
    }

    /// S×m raw draws of each query row at the next batch position.
    pub fn candidates(&self, xq: &Matrix) -> Result<Vec<Matrix>> {
        self.transform.check_inputs(xq)?;
        let draws = self.inner.candidates(&self.transform.inputs(xq))?;
        Ok(draws.into_iter().map(|f| self.to_raw(f)).collect())
    }

    pub fn commit(&mut self, x: &[f64]) -> Result<Matrix> {
        let xq = Matrix::from_vec(1, x.len(), x.to_vec());
        self.transform.check_inputs(&xq)?;
        let u = self.transform.inputs(&xq);
        let f = self.inner.commit(u.row(0))?;
        Ok(self.to_raw(f))
    }

    pub fn committed(&self) -> usize {
        self.inner.committed()
    }
}
