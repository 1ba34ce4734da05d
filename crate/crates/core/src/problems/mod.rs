//! Benchmark objectives, all posed as maximization.

mod functions;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::mlp::{mlp_forward, Activation, MlpSpec, ParamVector};
use crate::numkit::{rng_from_seed, sobol_points_or_lhs, standard_normal, Matrix};
use crate::{Error, Result};

pub use functions::{ackley, branin, currin, dtlz1, dtlz5, hartmann6, nonstationary_1d, polynomial};

/// Global maximum of the negated Branin function.
pub const BRANIN_MAX: f64 = -0.397_887_357_729_738_1;
/// Global maximum of the negated six-dimensional Hartmann function.
pub const HARTMANN6_MAX: f64 = 3.322_368_011_415_515;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInfo {
    pub name: String,
    pub bounds: Vec<(f64, f64)>,
    pub objectives: usize,
    /// Hypervolume reference point (multi-objective only).
    pub reference: Option<Vec<f64>>,
    /// Known global maximum (single-objective only).
    pub known_best: Option<f64>,
}

impl ProblemInfo {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// A deterministic objective over a box.
pub trait Problem: Send + Sync {
    fn info(&self) -> &ProblemInfo;

    /// Objective values at an in-bounds point.
    fn value(&self, x: &[f64]) -> Vec<f64>;

    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let info = self.info();
        if x.len() != info.dim() {
            return Err(Error::BadDimension(format!("{} takes {} inputs, got {}", info.name, info.dim(), x.len())));
        }
        for (dim, (&value, &(lo, hi))) in x.iter().zip(&info.bounds).enumerate() {
            if !(value >= lo && value <= hi) {
                return Err(Error::OutOfBounds { dim, value, lo, hi });
            }
        }
        let y = self.value(x);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation(x.to_vec()));
        }
        Ok(y)
    }
}

/// Per-coordinate minimum minus a tenth of the range over `count` Sobol points.
pub fn derive_reference(problem: &dyn Problem, count: usize) -> Vec<f64> {
    let info = problem.info();
    let unit = sobol_points_or_lhs(info.dim(), count, 0).points;
    let mut lo = vec![f64::INFINITY; info.objectives];
    let mut hi = vec![f64::NEG_INFINITY; info.objectives];
    for u in unit.row_iter() {
        let x: Vec<f64> = u.iter().zip(&info.bounds).map(|(t, (a, b))| a + t * (b - a)).collect();
        for (k, v) in problem.value(&x).into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    lo.iter().zip(&hi).map(|(l, h)| l - 0.1 * (h - l)).collect()
}

/// Settings selecting and shaping a problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub dim: Option<usize>,
    pub objectives: Option<usize>,
    /// Seed of randomly constructed objectives.
    pub seed: u64,
    /// Named input box variant, where a problem offers more than one.
    pub domain: Option<String>,
    /// Hidden widths of the network behind `nn_draw`.
    pub hidden_widths: Option<Vec<usize>>,
}

impl ProblemConfig {
    pub fn named(name: &str) -> Self {
        ProblemConfig { name: name.to_string(), ..ProblemConfig::default() }
    }
}

struct Closed {
    info: ProblemInfo,
    f: fn(&[f64]) -> Vec<f64>,
}

impl Problem for Closed {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

fn single(name: &str, bounds: Vec<(f64, f64)>, known_best: Option<f64>, f: fn(&[f64]) -> Vec<f64>) -> Box<dyn Problem> {
    Box::new(Closed { info: ProblemInfo { name: name.into(), bounds, objectives: 1, reference: None, known_best }, f })
}

struct Dtlz {
    info: ProblemInfo,
    five: bool,
}

impl Problem for Dtlz {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        let m = self.info.objectives;
        let f = if self.five { dtlz5(x, m) } else { dtlz1(x, m) };
        f.into_iter().map(|v| -v).collect()
    }
}

/// Σ over blocks of four of Π (x_j − c_j) with frozen c ~ N(0, 1).
pub struct PolynomialProblem {
    info: ProblemInfo,
    pub coefficients: Vec<f64>,
}

impl PolynomialProblem {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim % 4 != 0 {
            return Err(Error::BadDimension(format!("polynomial dimension must be a positive multiple of 4, got {dim}")));
        }
        let mut rng = rng_from_seed(seed);
        let coefficients = (0..dim).map(|_| standard_normal(&mut rng)).collect();
        let info =
            ProblemInfo { name: "polynomial".into(), bounds: vec![(0.0, 1.0); dim], objectives: 1, reference: None, known_best: None };
        Ok(PolynomialProblem { info, coefficients })
    }
}

impl Problem for PolynomialProblem {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        vec![polynomial(x, &self.coefficients)]
    }
}

/// Output of a tanh network with frozen N(0, 1) weights.
pub struct NnDrawProblem {
    info: ProblemInfo,
    pub spec: MlpSpec,
    pub params: ParamVector,
}

impl NnDrawProblem {
    pub fn new(dim: usize, hidden: Vec<usize>, seed: u64) -> Result<Self> {
        let spec = MlpSpec::new(dim, hidden, 1, Activation::Tanh);
        spec.validate()?;
        let mut rng = rng_from_seed(seed);
        let params = ParamVector((0..spec.num_params()).map(|_| standard_normal(&mut rng)).collect());
        let info =
            ProblemInfo { name: "nn_draw".into(), bounds: vec![(0.0, 1.0); dim], objectives: 1, reference: None, known_best: None };
        Ok(NnDrawProblem { info, spec, params })
    }
}

impl Problem for NnDrawProblem {
    fn info(&self) -> &ProblemInfo {
        &self.info
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        let out = mlp_forward(&self.spec, &self.params, &Matrix::from_vec(1, x.len(), x.to_vec()))
            .expect("input width checked by evaluate");
        vec![out[(0, 0)]]
    }
}

/// Builds a problem from its configuration.
pub trait ProblemFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn describe(&self) -> &'static str;

    fn build(&self, cfg: &ProblemConfig) -> Result<Box<dyn Problem>>;
}

struct Factory {
    name: &'static str,
    about: &'static str,
    build: fn(&ProblemConfig) -> Result<Box<dyn Problem>>,
}

impl ProblemFactory for Factory {
    fn name(&self) -> &'static str {
        self.name
    }

    fn describe(&self) -> &'static str {
        self.about
    }

    fn build(&self, cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
        (self.build)(cfg)
    }
}

fn fixed_dim(cfg: &ProblemConfig, dim: usize) -> Result<()> {
    match cfg.dim {
        Some(d) if d != dim => Err(Error::BadDimension(format!("{} is {dim}-dimensional, got dim = {d}", cfg.name))),
        _ => Ok(()),
    }
}

fn fixed_objectives(cfg: &ProblemConfig, m: usize) -> Result<()> {
    match cfg.objectives {
        Some(k) if k != m => Err(Error::BadDimension(format!("{} has {m} objectives, got objectives = {k}", cfg.name))),
        _ => Ok(()),
    }
}

fn no_domain(cfg: &ProblemConfig) -> Result<()> {
    match &cfg.domain {
        Some(d) => Err(Error::InvalidConfig(format!("{} has no domain variant `{d}`", cfg.name))),
        None => Ok(()),
    }
}

fn build_branin(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_dim(cfg, 2)?;
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    Ok(single("branin", vec![(-5.0, 10.0), (0.0, 15.0)], Some(BRANIN_MAX), |x| vec![-branin(x[0], x[1])]))
}

fn build_currin(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_dim(cfg, 2)?;
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    Ok(single("currin", vec![(0.0, 1.0); 2], None, |x| vec![-currin(x[0], x[1])]))
}

fn build_hartmann6(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_dim(cfg, 6)?;
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    Ok(single("hartmann6", vec![(0.0, 1.0); 6], Some(HARTMANN6_MAX), |x| vec![-hartmann6(x)]))
}

fn build_ackley(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_objectives(cfg, 1)?;
    let d = cfg.dim.unwrap_or(10);
    if d == 0 {
        return Err(Error::BadDimension("ackley needs dim >= 1".into()));
    }
    let range = match cfg.domain.as_deref() {
        None | Some("standard") => (-32.768, 32.768),
        Some("narrow") => (-5.0, 10.0),
        Some(other) => {
            return Err(Error::InvalidConfig(format!("ackley domain must be `standard` or `narrow`, got `{other}`")));
        }
    };
    Ok(single("ackley", vec![range; d], Some(0.0), |x| vec![-ackley(x)]))
}

/// Reference points from [`derive_reference`] with 10⁴ points, frozen.
const BRANIN_CURRIN_REF: [f64; 2] = [-324.599_035_925_517_7, -15.053_800_297_530_47];
const DTLZ1_REF: [f64; 2] = [-435.564_562_608_14, -446.666_128_518_286_03];
const DTLZ5_REF: [f64; 2] = [-2.167_307_997_943_407, -2.164_000_598_173_103_6];

fn build_branin_currin(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_dim(cfg, 2)?;
    fixed_objectives(cfg, 2)?;
    no_domain(cfg)?;
    let info = ProblemInfo {
        name: "branin_currin".into(),
        bounds: vec![(0.0, 1.0); 2],
        objectives: 2,
        reference: Some(BRANIN_CURRIN_REF.to_vec()),
        known_best: None,
    };
    Ok(Box::new(Closed { info, f: |x| vec![-branin(15.0 * x[0] - 5.0, 15.0 * x[1]), -currin(x[0], x[1])] }))
}

fn build_dtlz(cfg: &ProblemConfig, five: bool) -> Result<Box<dyn Problem>> {
    no_domain(cfg)?;
    let (name, default_dim, frozen) = if five { ("dtlz5", 6, DTLZ5_REF) } else { ("dtlz1", 5, DTLZ1_REF) };
    let d = cfg.dim.unwrap_or(default_dim);
    let m = cfg.objectives.unwrap_or(2);
    if m < 2 || d < m {
        return Err(Error::BadDimension(format!("{name} needs 2 <= objectives <= dim, got {m} and {d}")));
    }
    let info = ProblemInfo { name: name.into(), bounds: vec![(0.0, 1.0); d], objectives: m, reference: None, known_best: None };
    let mut problem = Dtlz { info, five };
    problem.info.reference =
        Some(if (d, m) == (default_dim, 2) { frozen.to_vec() } else { derive_reference(&problem, 10_000) });
    Ok(Box::new(problem))
}

fn build_polynomial(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    Ok(Box::new(PolynomialProblem::new(cfg.dim.unwrap_or(100), cfg.seed)?))
}

fn build_nn_draw(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    let hidden = cfg.hidden_widths.clone().unwrap_or_else(|| vec![256, 256]);
    Ok(Box::new(NnDrawProblem::new(cfg.dim.unwrap_or(100), hidden, cfg.seed)?))
}

fn build_nonstationary(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    fixed_dim(cfg, 1)?;
    fixed_objectives(cfg, 1)?;
    no_domain(cfg)?;
    Ok(single("nonstationary_1d", vec![(-6.0, 6.0)], None, |x| vec![nonstationary_1d(x[0])]))
}

/// Problems addressable by name.
#[derive(Clone, Default)]
pub struct ProblemRegistry {
    entries: BTreeMap<&'static str, Arc<dyn ProblemFactory>>,
}

impl ProblemRegistry {
    pub fn builtin() -> Self {
        let mut r = ProblemRegistry::default();
        let table: [(&'static str, &'static str, fn(&ProblemConfig) -> Result<Box<dyn Problem>>); 10] = [
            ("branin", "Branin, d=2", build_branin),
            ("currin", "Currin exponential, d=2", build_currin),
            ("hartmann6", "Hartmann, d=6", build_hartmann6),
            ("ackley", "Ackley, d=10 by default; domain = standard | narrow", build_ackley),
            ("branin_currin", "Branin and Currin, d=2, two objectives", build_branin_currin),
            ("dtlz1", "DTLZ1, d=5 and two objectives by default", |c| build_dtlz(c, false)),
            ("dtlz5", "DTLZ5, d=6 and two objectives by default", |c| build_dtlz(c, true)),
            ("polynomial", "random block polynomial on [0,1]^d, d=100 by default", build_polynomial),
            ("nn_draw", "frozen random tanh network on [0,1]^d, d=100 by default", build_nn_draw),
            ("nonstationary_1d", "one-dimensional toy with a high-variance band", build_nonstationary),
        ];
        for (name, about, build) in table {
            r.register(Arc::new(Factory { name, about, build }));
        }
        r
    }

    pub fn global() -> &'static ProblemRegistry {
        static REGISTRY: OnceLock<ProblemRegistry> = OnceLock::new();
        REGISTRY.get_or_init(ProblemRegistry::builtin)
    }

    pub fn register(&mut self, factory: Arc<dyn ProblemFactory>) {
        self.entries.insert(factory.name(), factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.values().map(|f| (f.name(), f.describe())).collect()
    }

    pub fn build(&self, cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
        let factory = self.entries.get(cfg.name.as_str()).ok_or_else(|| Error::UnknownName {
            kind: "problem",
            name: cfg.name.clone(),
            known: self.names().join(", "),
        })?;
        factory.build(cfg)
    }
}

pub fn build_problem(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    ProblemRegistry::global().build(cfg)
}
