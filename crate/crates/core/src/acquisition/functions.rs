use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::numkit::Matrix;
use crate::surrogate::PosteriorDraws;
use crate::{Error, Result};

use super::pareto::{hypervolume, pareto_front, weakly_dominates, ParetoState};

/// Batch qEI: (1/S)·Σₛ max(0, maxⱼ fₛ(xⱼ) − f*). Uses the first objective.
pub fn qei(draws: &PosteriorDraws, incumbent: f64) -> f64 {
    let total: f64 = (0..draws.samples())
        .map(|s| {
            let best = (0..draws.points()).map(|j| draws.get(s, j, 0)).fold(f64::NEG_INFINITY, f64::max);
            (best - incumbent).max(0.0)
        })
        .sum();
    total / draws.samples() as f64
}

/// (1/S)·Σₛ [HV(front ∪ {fₛ(xⱼ)}ⱼ) − HV(front)].
pub fn mc_hvi(draws: &PosteriorDraws, front: &ParetoState) -> f64 {
    let base = front.hypervolume();
    let total: f64 = (0..draws.samples())
        .map(|s| {
            let mut with = front.clone();
            for row in draws.sample(s).chunks(draws.outputs()) {
                with.insert(row);
            }
            (with.hypervolume() - base).max(0.0)
        })
        .sum();
    total / draws.samples() as f64
}

/// A Monte-Carlo acquisition over joint draws of a batch.
pub trait Acquisition: Send + Sync {
    fn name(&self) -> &'static str;

    /// Scores for one more point given the S×m draws of already chosen batch points.
    fn prepare<'a>(&'a self, committed: &[Matrix]) -> Box<dyn CandidateScore + 'a>;

    /// Value of a whole batch.
    fn batch_value(&self, draws: &PosteriorDraws) -> f64;
}

pub trait CandidateScore: Sync {
    /// Acquisition of the committed batch plus a point with S×m draws `f`.
    fn score(&self, f: &Matrix) -> f64;
}

pub struct ExpectedImprovement {
    pub incumbent: f64,
}

struct EiScore {
    incumbent: f64,
    /// Per-draw maximum over committed points; empty before the first commit.
    best: Vec<f64>,
}

impl CandidateScore for EiScore {
    fn score(&self, f: &Matrix) -> f64 {
        let total: f64 = (0..f.rows())
            .map(|s| {
                let b = self.best.get(s).copied().unwrap_or(f64::NEG_INFINITY);
                (b.max(f[(s, 0)]) - self.incumbent).max(0.0)
            })
            .sum();
        total / f.rows() as f64
    }
}

impl Acquisition for ExpectedImprovement {
    fn name(&self) -> &'static str {
        "qei"
    }

    fn prepare<'a>(&'a self, committed: &[Matrix]) -> Box<dyn CandidateScore + 'a> {
        let samples = committed.first().map_or(0, |c| c.rows());
        let best = (0..samples).map(|s| committed.iter().map(|c| c[(s, 0)]).fold(f64::NEG_INFINITY, f64::max)).collect();
        Box::new(EiScore { incumbent: self.incumbent, best })
    }

    fn batch_value(&self, draws: &PosteriorDraws) -> f64 {
        qei(draws, self.incumbent)
    }
}

pub struct HypervolumeImprovement {
    pub front: ParetoState,
}

struct HviScore {
    /// Per draw: the front extended by that draw's committed points.
    fronts: Vec<ParetoState>,
    /// Mean over draws of HV(extended front) − HV(front).
    offset: f64,
}

impl CandidateScore for HviScore {
    fn score(&self, f: &Matrix) -> f64 {
        let total: f64 = self.fronts.iter().enumerate().map(|(s, front)| exclusive_volume(f.row(s), front)).sum();
        self.offset + total / f.rows() as f64
    }
}

/// Volume that `p` adds to `front`.
fn exclusive_volume(p: &[f64], front: &ParetoState) -> f64 {
    let r = &front.reference;
    if !p.iter().zip(r).all(|(a, b)| a > b) || front.points.iter().any(|q| weakly_dominates(q, p)) {
        return 0.0;
    }
    let own: f64 = p.iter().zip(r).map(|(a, b)| a - b).product();
    let limited: Vec<Vec<f64>> =
        front.points.iter().map(|q| q.iter().zip(p).map(|(a, b)| a.min(*b)).collect()).collect();
    (own - hypervolume(&limited, r)).max(0.0)
}

impl Acquisition for HypervolumeImprovement {
    fn name(&self) -> &'static str {
        "qhvi"
    }

    fn prepare<'a>(&'a self, committed: &[Matrix]) -> Box<dyn CandidateScore + 'a> {
        if committed.is_empty() {
            return Box::new(HviFirst { front: &self.front });
        }
        let base = self.front.hypervolume();
        let fronts: Vec<ParetoState> = (0..committed[0].rows())
            .map(|s| {
                let mut front = self.front.clone();
                for c in committed {
                    front.insert(c.row(s));
                }
                front
            })
            .collect();
        let offset = fronts.iter().map(|f| f.hypervolume() - base).sum::<f64>() / fronts.len() as f64;
        Box::new(HviScore { fronts, offset })
    }

    fn batch_value(&self, draws: &PosteriorDraws) -> f64 {
        mc_hvi(draws, &self.front)
    }
}

struct HviFirst<'a> {
    front: &'a ParetoState,
}

impl CandidateScore for HviFirst<'_> {
    fn score(&self, f: &Matrix) -> f64 {
        let total: f64 = (0..f.rows()).map(|s| exclusive_volume(f.row(s), self.front)).sum();
        total / f.rows() as f64
    }
}

/// What an acquisition may depend on: the observations so far.
pub struct AcqContext<'a> {
    /// Raw observed objectives, n×m.
    pub observed: &'a Matrix,
    /// Hypervolume reference point for multi-objective problems.
    pub reference: Option<&'a [f64]>,
}

pub trait AcquisitionFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(&self, ctx: &AcqContext<'_>) -> Result<Box<dyn Acquisition>>;
}

struct QeiFactory;

impl AcquisitionFactory for QeiFactory {
    fn name(&self) -> &'static str {
        "qei"
    }

    fn build(&self, ctx: &AcqContext<'_>) -> Result<Box<dyn Acquisition>> {
        if ctx.observed.cols() != 1 {
            return Err(Error::InvalidConfig(format!("qei needs one objective, got {}", ctx.observed.cols())));
        }
        let incumbent = ctx.observed.column(0).into_iter().fold(f64::NEG_INFINITY, f64::max);
        Ok(Box::new(ExpectedImprovement { incumbent }))
    }
}

struct QhviFactory;

impl AcquisitionFactory for QhviFactory {
    fn name(&self) -> &'static str {
        "qhvi"
    }

    fn build(&self, ctx: &AcqContext<'_>) -> Result<Box<dyn Acquisition>> {
        let reference = ctx
            .reference
            .ok_or_else(|| Error::InvalidConfig("qhvi needs a reference point".into()))?;
        if reference.len() != ctx.observed.cols() || reference.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "reference point of length {} for {} objectives",
                reference.len(),
                ctx.observed.cols()
            )));
        }
        Ok(Box::new(HypervolumeImprovement { front: pareto_front(ctx.observed, reference) }))
    }
}

/// Acquisitions addressable by name; `auto` picks by objective count.
#[derive(Clone, Default)]
pub struct AcquisitionRegistry {
    entries: BTreeMap<&'static str, Arc<dyn AcquisitionFactory>>,
}

impl AcquisitionRegistry {
    pub fn builtin() -> Self {
        let mut r = AcquisitionRegistry::default();
        r.register(Arc::new(QeiFactory));
        r.register(Arc::new(QhviFactory));
        r
    }

    pub fn global() -> &'static AcquisitionRegistry {
        static REGISTRY: OnceLock<AcquisitionRegistry> = OnceLock::new();
        REGISTRY.get_or_init(AcquisitionRegistry::builtin)
    }

    pub fn register(&mut self, factory: Arc<dyn AcquisitionFactory>) {
        self.entries.insert(factory.name(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn build(&self, name: &str, ctx: &AcqContext<'_>) -> Result<Box<dyn Acquisition>> {
        let name = match name {
            "auto" if ctx.observed.cols() == 1 => "qei",
            "auto" => "qhvi",
            other => other,
        };
        let factory = self.entries.get(name).ok_or_else(|| Error::UnknownName {
            kind: "acquisition",
            name: name.to_string(),
            known: format!("auto, {}", self.names().join(", ")),
        })?;
        factory.build(ctx)
    }
}
