use std::sync::Arc;

use crate::bnn::{LlaState, WeightPosterior};
use crate::gp::{DklState, GpState};
use crate::numkit::{dot, semidefinite_row, semidefinite_tol, solve_lower_vec, Matrix};
use crate::{Error, Result};

use super::BaseSamples;

/// A fitted posterior over standardized objectives on the unit cube.
pub trait PosteriorModel: Send + Sync {
    fn outputs(&self) -> usize;

    /// Scorer whose draws are driven by `base`; it starts with no committed points.
    fn scorer<'a>(&'a self, base: &'a BaseSamples) -> Result<Box<dyn DrawScorer + 'a>>;

    /// Marginal log-likelihood per objective, where the model defines one.
    fn mll(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Joint draws built one batch position at a time.
///
/// Draws for a candidate are joint with every committed point, so a batch
/// scored as `commit(x1), …, candidates([xj])` has the same law as a joint
/// draw at `x1..xj`.
pub trait DrawScorer: Sync {
    /// S×m draws for each query row placed at the next batch position.
    fn candidates(&self, xq: &Matrix) -> Result<Vec<Matrix>>;

    /// Fixes `x` at the next batch position and returns its S×m draws.
    fn commit(&mut self, x: &[f64]) -> Result<Matrix>;

    fn committed(&self) -> usize;
}

/// A GP possibly acting on mapped inputs, with an optional prior mean.
pub trait LatentGp: Send + Sync {
    fn state(&self) -> &GpState;

    /// Kernel inputs for `x` and the prior mean there (zero when `None`).
    fn embed(&self, x: &Matrix) -> Result<(Matrix, Option<Vec<f64>>)>;
}

impl LatentGp for GpState {
    fn state(&self) -> &GpState {
        self
    }

    fn embed(&self, x: &Matrix) -> Result<(Matrix, Option<Vec<f64>>)> {
        Ok((x.clone(), None))
    }
}

impl LatentGp for DklState {
    fn state(&self) -> &GpState {
        &self.gp
    }

    fn embed(&self, x: &Matrix) -> Result<(Matrix, Option<Vec<f64>>)> {
        Ok((self.transform(x)?, None))
    }
}

/// One output head of a linearized Laplace posterior.
pub struct LlaHead {
    pub state: Arc<LlaState>,
    pub output: usize,
}

impl LatentGp for LlaHead {
    fn state(&self) -> &GpState {
        &self.state.gps[self.output]
    }

    fn embed(&self, x: &Matrix) -> Result<(Matrix, Option<Vec<f64>>)> {
        let (j, offset) = self.state.features(x, self.output)?;
        Ok((j, Some(offset)))
    }
}

/// Independent GPs, one per objective.
pub struct GpFamily {
    pub heads: Vec<Box<dyn LatentGp>>,
}

impl PosteriorModel for GpFamily {
    fn outputs(&self) -> usize {
        self.heads.len()
    }

    fn scorer<'a>(&'a self, base: &'a BaseSamples) -> Result<Box<dyn DrawScorer + 'a>> {
        check_base(base, self.outputs())?;
        let heads = self
            .heads
            .iter()
            .map(|h| {
                let gp = h.state();
                let beta = solve_lower_vec(gp.cholesky_factor(), gp.targets())?;
                let tol = semidefinite_tol(&gp.kernel().diag(gp.inputs()));
                Ok(HeadScorer {
                    head: h.as_ref(),
                    beta,
                    tol,
                    embedded: Vec::new(),
                    whitened: Vec::new(),
                    factor: Matrix::zeros(base.positions(), base.positions()),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Box::new(GpScorer { base, heads }))
    }

    fn mll(&self) -> Option<Vec<f64>> {
        Some(self.heads.iter().map(|h| h.state().mll()).collect())
    }
}

fn check_base(base: &BaseSamples, outputs: usize) -> Result<()> {
    if base.outputs() != outputs || base.samples() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} base draws over {} objectives for a {outputs}-objective model",
            base.samples(),
            base.outputs()
        )));
    }
    Ok(())
}

struct HeadScorer<'a> {
    head: &'a dyn LatentGp,
    /// L⁻¹y, so the posterior mean at a query is vᵀβ with v = L⁻¹k(X, x).
    beta: Vec<f64>,
    tol: f64,
    embedded: Vec<Vec<f64>>,
    whitened: Vec<Vec<f64>>,
    /// Rows of the semidefinite factor of the committed points' posterior covariance.
    factor: Matrix,
}

/// Posterior mean, factor row and pivot of one query against the committed points.
struct Placement {
    mean: f64,
    row: Vec<f64>,
    pivot: f64,
    embedded: Vec<f64>,
    whitened: Vec<f64>,
}

impl HeadScorer<'_> {
    fn place(&self, xq: &Matrix) -> Result<Vec<Placement>> {
        let gp = self.head.state();
        let (feats, offset) = self.head.embed(xq)?;
        let v = gp.whiten(&feats)?;
        let prior = gp.kernel().diag(&feats);
        let c = self.embedded.len();
        let mut out = Vec::with_capacity(xq.rows());
        for i in 0..xq.rows() {
            let vi: Vec<f64> = v.column(i);
            let fi = feats.row(i);
            let cross: Vec<f64> = (0..c)
                .map(|j| gp.kernel().eval(fi, &self.embedded[j]) - dot(&vi, &self.whitened[j]))
                .collect();
            let var = prior[i] - dot(&vi, &vi);
            let (row, pivot) = semidefinite_row(&self.factor, &cross, var, self.tol);
            let mean = dot(&vi, &self.beta) + offset.as_ref().map_or(0.0, |o| o[i]);
            out.push(Placement { mean, row, pivot, embedded: fi.to_vec(), whitened: vi });
        }
        Ok(out)
    }
}

struct GpScorer<'a> {
    base: &'a BaseSamples,
    heads: Vec<HeadScorer<'a>>,
}

impl GpScorer<'_> {
    fn position(&self) -> Result<usize> {
        let c = self.committed();
        if c >= self.base.positions() {
            return Err(Error::DimensionMismatch(format!("base samples cover only {} batch positions", c)));
        }
        Ok(c)
    }

    fn fill(&self, k: usize, p: &Placement, pos: usize, out: &mut Matrix) {
        for s in 0..self.base.samples() {
            let mut f = p.mean + p.pivot * self.base.normal(s, pos, k);
            for (j, r) in p.row.iter().enumerate() {
                f += r * self.base.normal(s, j, k);
            }
            out[(s, k)] = f;
        }
    }
}

impl DrawScorer for GpScorer<'_> {
    fn candidates(&self, xq: &Matrix) -> Result<Vec<Matrix>> {
        let pos = self.position()?;
        let mut out = vec![Matrix::zeros(self.base.samples(), self.heads.len()); xq.rows()];
        for (k, head) in self.heads.iter().enumerate() {
            for (i, p) in head.place(xq)?.iter().enumerate() {
                self.fill(k, p, pos, &mut out[i]);
            }
        }
        Ok(out)
    }

    fn commit(&mut self, x: &[f64]) -> Result<Matrix> {
        let pos = self.position()?;
        let xq = Matrix::from_vec(1, x.len(), x.to_vec());
        let mut out = Matrix::zeros(self.base.samples(), self.heads.len());
        for k in 0..self.heads.len() {
            let p = self.heads[k].place(&xq)?.pop().expect("one query");
            self.fill(k, &p, pos, &mut out);
            let head = &mut self.heads[k];
            head.factor.row_mut(pos)[..pos].copy_from_slice(&p.row);
            head.factor[(pos, pos)] = p.pivot;
            head.embedded.push(p.embedded);
            head.whitened.push(p.whitened);
        }
        Ok(out)
    }

    fn committed(&self) -> usize {
        self.heads.first().map_or(0, |h| h.embedded.len())
    }
}

/// Weight-space posterior: draw `s` evaluates the network picked by the
/// base uniform of that draw.
impl PosteriorModel for WeightPosterior {
    fn outputs(&self) -> usize {
        self.spec.output_dim
    }

    fn scorer<'a>(&'a self, base: &'a BaseSamples) -> Result<Box<dyn DrawScorer + 'a>> {
        check_base(base, self.outputs())?;
        Ok(Box::new(NetworkScorer { posterior: self, indices: base.member_indices(self.samples.len()), committed: 0 }))
    }
}

struct NetworkScorer<'a> {
    posterior: &'a WeightPosterior,
    indices: Vec<usize>,
    committed: usize,
}

impl DrawScorer for NetworkScorer<'_> {
    fn candidates(&self, xq: &Matrix) -> Result<Vec<Matrix>> {
        let d = self.posterior.draws_for_indices(xq, &self.indices)?;
        let m = d.outputs();
        Ok((0..xq.rows()).map(|j| Matrix::from_fn(d.samples(), m, |s, k| d.get(s, j, k))).collect())
    }

    fn commit(&mut self, x: &[f64]) -> Result<Matrix> {
        let mut out = self.candidates(&Matrix::from_vec(1, x.len(), x.to_vec()))?;
        self.committed += 1;
        Ok(out.pop().expect("one query"))
    }

    fn committed(&self) -> usize {
        self.committed
    }
}
