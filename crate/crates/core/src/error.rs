use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("triangular matrix has a zero diagonal entry at row {0}")]
    SingularTriangular(usize),

    #[error("requested {requested} Sobol dimensions but the direction-number table holds {available}")]
    DimTooLarge { requested: usize, available: usize },

    #[error("function evaluation is not finite at {0:?}")]
    NonFiniteEvaluation(Vec<f64>),

    #[error("argument outside the function domain: {0}")]
    DomainError(String),

    #[error("network loss is not finite")]
    NonFiniteLoss,

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("more than 90% of HMC proposals diverged ({diverged} of {total})")]
    AllDiverged { diverged: usize, total: usize },

    #[error("sampler state became non-finite at iteration {0}")]
    NonFiniteState(usize),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("degenerate bounds for dimension {dim}: [{lo}, {hi}]")]
    DegenerateBounds { dim: usize, lo: f64, hi: f64 },

    #[error("input outside problem bounds in dimension {dim}: {value} not in [{lo}, {hi}]")]
    OutOfBounds { dim: usize, value: f64, lo: f64, hi: f64 },

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName { kind: &'static str, name: String, known: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{kind} surrogate: {source}")]
    Surrogate {
        kind: String,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
