use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate simplex: m-volume {volume:e} below tolerance {threshold:e}")]
    DegenerateSimplex { volume: f64, threshold: f64 },

    #[error("boundary of 0-chain undefined here")]
    BoundaryOfZeroChain,

    /// Mass-like evaluations need non-overlapping terms; the pair indexes the offending terms.
    #[error("overlap unverified: terms {0} and {1} overlap")]
    OverlapUnverified(usize, usize),

    #[error("H(0) = {0} but must vanish")]
    CostNonzeroAtOrigin(f64),

    #[error("H vanishes at sampled t = {0:e}")]
    CostVanishes(f64),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("chain not embeddable in grid complex: {0}")]
    NotEmbeddable(String),

    #[error("slice base point is within tolerance of a projected face")]
    NonGenericSlice,

    #[error("quadrature did not converge: error estimate {achieved:e} > requested {requested:e}")]
    QuadratureNoConvergence { achieved: f64, requested: f64 },

    #[error("point is not on the current (distance {0:e})")]
    NotOnCurrent(f64),

    #[error("ball selection budget exhausted at coverage {achieved:.6} (target {target:.6})")]
    CoverageBudget { achieved: f64, target: f64 },

    #[error("certificate violation: {0}")]
    Certificate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) => 2,
            Error::QuadratureNoConvergence { .. }
            | Error::CoverageBudget { .. }
            | Error::Certificate(_)
            | Error::NumericalBreakdown(_) => 4,
            _ => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
