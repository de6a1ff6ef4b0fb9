use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown system kind `{0}`")]
    UnknownKind(String),
    #[error("sigma is undefined for p <= 1")]
    SigmaUndefined,
    #[error("sigma = {0} is not below 1")]
    SigmaOutOfRange(f64),
    #[error("exponent mq/(1+s) - (p+1) vanishes")]
    DegenerateExponent,
    #[error("a*m = {0} <= 2, the inhibitor equation has no decaying solution")]
    NoInhibitorSolution(f64),
    #[error("source decays like r^-{0}; t*A(t) is not integrable at infinity")]
    NonintegrableSource(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no convergence after {iterations} sweeps (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("iterates collapsed below the positivity floor: {0}")]
    Degenerate(String),
    #[error("iterate left [1e-30, 1e30] at node {node} (value {value:e})")]
    Diverged { node: usize, value: f64 },
    #[error("fit window too narrow: {0}")]
    WindowTooNarrow(String),
    #[error("log regressors are collinear on this window")]
    Collinear,
    #[error("regime {outcome} ({tag}) does not admit this operation")]
    Regime { outcome: String, tag: String },
    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Stable machine-readable tag.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::UnknownKind(_) => "UNKNOWN_KIND",
            Error::SigmaUndefined => "SIGMA_UNDEFINED",
            Error::SigmaOutOfRange(_) => "SIGMA_OUT_OF_RANGE",
            Error::DegenerateExponent => "DEGENERATE_EXPONENT",
            Error::NoInhibitorSolution(_) => "NO_INHIBITOR_SOLUTION",
            Error::NonintegrableSource(_) => "NONINTEGRABLE_SOURCE",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::Degenerate(_) => "DEGENERATE",
            Error::Diverged { .. } => "DIVERGED",
            Error::WindowTooNarrow(_) => "WINDOW_TOO_NARROW",
            Error::Collinear => "COLLINEAR",
            Error::Regime { .. } => "REGIME_MISMATCH",
            Error::Context { source, .. } => source.tag(),
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
