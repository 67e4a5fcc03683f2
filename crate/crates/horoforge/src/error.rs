use thiserror::Error;

/// Errors surfaced by the engine and the built-in geometries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch on the {side} factor: expected {expected}, got {got}")]
    DomainMismatch {
        side: &'static str,
        expected: String,
        got: String,
    },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("witness set is empty")]
    EmptyWitnessSet,
    #[error("landmark sets do not match")]
    LandmarkMismatch,
    #[error("{0} is not a landmark of the given set")]
    NotLandmark(String),
    #[error("basepoint is not among the landmarks")]
    BasepointMissing,
    #[error("landmarks {0} and {1} coincide within the equality tolerance")]
    DuplicateLandmark(usize, usize),
    #[error("sequence is not Cauchy: d_sym(x_{i}, x_{j}) = {dist}")]
    NotCauchy { i: usize, j: usize, dist: f64 },
    #[error("no convergence within {steps} steps (last residual {residual})")]
    NoConvergence { steps: usize, residual: f64 },
    #[error("horofunction source cannot be re-evaluated off its landmark set")]
    NonReevaluatable,
    #[error("operation requires M = N but the bifunctional has distinct domains")]
    DomainsDiffer,
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i64),
    #[error("convex polytopes are supported in dimension 2 only (got {0})")]
    UnsupportedDimension(usize),
    #[error("point {0} is not in the polytope interior")]
    OutsidePolytope(String),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown geometry '{0}'")]
    UnknownGeometry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
