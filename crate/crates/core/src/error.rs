use thiserror::Error;

/// Errors raised by grid construction, model setup, solvers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: expected 1, 2 or 3")]
    InvalidDimension(usize),
    #[error("points per axis must be a power of two >= 8, got {0}")]
    NotPowerOfTwo(usize),
    #[error("half extent must be positive, got {0}")]
    NonPositiveExtent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has {got} values, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("field does not decay at the box boundary (boundary/max ratio {ratio:.3e} > {threshold:.3e})")]
    BoundaryDecay { ratio: f64, threshold: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("alpha = {alpha} outside (0, {dim})")]
    AlphaOutOfRange { alpha: f64, dim: usize },
    #[error("limiting problem has no ground state: {0}")]
    RegimeViolation(String),
    #[error("penalization hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("geometric precondition violated: {0}")]
    Geometry(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("grid cannot resolve the compressed profile (spectral tail {tail:.3e})")]
    Nyquist { tail: f64 },
    #[error("iterate collapsed to zero after {iterations} iterations")]
    Collapse { iterations: usize },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("solver failed at eps = {eps}: {source}")]
    AtEps {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
