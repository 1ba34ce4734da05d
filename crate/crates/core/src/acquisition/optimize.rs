use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numkit::{sobol_points_or_lhs, Matrix, Rng};
use crate::surrogate::{BaseSamples, FittedSurrogate, RawScorer};
use crate::{Error, Result};

use super::functions::{Acquisition, CandidateScore};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcqConfig {
    /// Registry name, or `auto` for qEI on one objective and qHVI otherwise.
    pub kind: String,
    pub mc_draws: usize,
    pub candidate_pool: usize,
    pub refine_starts: usize,
    /// Single-coordinate line searches per start, cycling through coordinates.
    pub refine_iters: usize,
}

impl Default for AcqConfig {
    fn default() -> Self {
        AcqConfig { kind: "auto".into(), mc_draws: 128, candidate_pool: 1024, refine_starts: 10, refine_iters: 50 }
    }
}

impl AcqConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_draws == 0 || self.candidate_pool == 0 {
            return Err(Error::InvalidConfig("acquisition needs mc_draws and candidate_pool >= 1".into()));
        }
        Ok(())
    }
}

const GOLDEN_STEPS: usize = 12;
const CHUNK: usize = 64;

/// Greedy batch construction under fixed base draws: each position scores a
/// fresh Sobol pool, refines the best starts by coordinate golden-section
/// search and commits the winner.
pub fn optimize_acq(
    fitted: &FittedSurrogate,
    acq: &dyn Acquisition,
    cfg: &AcqConfig,
    batch: usize,
    bounds: &[(f64, f64)],
    rng: &mut Rng,
) -> Result<Matrix> {
    cfg.validate()?;
    if batch == 0 {
        return Err(Error::InvalidConfig("batch size must be at least 1".into()));
    }
    let d = bounds.len();
    let base = BaseSamples::sobol(cfg.mc_draws, batch, fitted.outputs(), rng);
    let mut scorer = fitted.scorer(&base)?;
    let mut committed: Vec<Matrix> = Vec::with_capacity(batch);
    let mut chosen = Matrix::zeros(0, d);
    for _ in 0..batch {
        let unit = sobol_points_or_lhs(d, cfg.candidate_pool, rng.next_u64() | 1).points;
        let pool = Matrix::from_fn(unit.rows(), d, |i, j| bounds[j].0 + unit[(i, j)] * (bounds[j].1 - bounds[j].0));
        let score = acq.prepare(&committed);
        let objective = Objective { scorer: &scorer, score: score.as_ref() };
        let values = objective.pool(&pool)?;

        let mut order: Vec<usize> = (0..pool.rows()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let starts: Vec<(Vec<f64>, f64)> =
            order.iter().take(cfg.refine_starts.max(1)).map(|&i| (pool.row(i).to_vec(), values[i])).collect();
        let mut refined = starts
            .into_par_iter()
            .map(|(x, v)| objective.refine(x, v, bounds, cfg.refine_iters))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, r) in refined.iter().enumerate() {
            if r.1 > refined[best].1 {
                best = i;
            }
        }
        let x = refined.swap_remove(best).0;
        committed.push(scorer.commit(&x)?);
        chosen.push_row(&x);
    }
    Ok(chosen)
}

struct Objective<'a, 'b> {
    scorer: &'a RawScorer<'b>,
    score: &'a dyn CandidateScore,
}

impl Objective<'_, '_> {
    fn pool(&self, pool: &Matrix) -> Result<Vec<f64>> {
        let chunks: Vec<Vec<usize>> =
            (0..pool.rows()).collect::<Vec<_>>().chunks(CHUNK).map(|c| c.to_vec()).collect();
        let scored = chunks
            .par_iter()
            .map(|idx| {
                let draws = self.scorer.candidates(&pool.select_rows(idx))?;
                Ok(draws.iter().map(|f| self.score.score(f)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(scored.into_iter().flatten().collect())
    }

    fn at(&self, x: &[f64]) -> Result<f64> {
        let f = self.scorer.candidates(&Matrix::from_vec(1, x.len(), x.to_vec()))?;
        Ok(self.score.score(&f[0]))
    }

    /// Coordinate-wise golden-section search in a window that halves after
    /// every sweep; moves only on strict improvement.
    fn refine(&self, mut x: Vec<f64>, mut value: f64, bounds: &[(f64, f64)], iters: usize) -> Result<(Vec<f64>, f64)> {
        let d = bounds.len();
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for it in 0..iters {
            let c = it % d;
            let (lo, hi) = bounds[c];
            let half = 0.25 * (hi - lo) * 0.5f64.powi((it / d) as i32);
            let (mut a, mut b) = ((x[c] - half).max(lo), (x[c] + half).min(hi));
            let mut probe = x.clone();
            let eval = |t: f64, probe: &mut Vec<f64>| -> Result<f64> {
                probe[c] = t;
                self.at(probe)
            };
            let mut x1 = b - ratio * (b - a);
            let mut x2 = a + ratio * (b - a);
            let mut f1 = eval(x1, &mut probe)?;
            let mut f2 = eval(x2, &mut probe)?;
            for _ in 0..GOLDEN_STEPS {
                if f1 >= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - ratio * (b - a);
                    f1 = eval(x1, &mut probe)?;
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + ratio * (b - a);
                    f2 = eval(x2, &mut probe)?;
                }
            }
            let (t, f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if f > value {
                x[c] = t.clamp(lo, hi);
                value = f;
            }
        }
        Ok((x, value))
    }
}
