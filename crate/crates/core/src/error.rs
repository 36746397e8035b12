use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree overflow: {left} + {right} exceeds dimension {dim}")]
    DegreeOverflow { left: usize, right: usize, dim: usize },
    #[error("invalid degree {degree} for {op}")]
    InvalidDegree { op: &'static str, degree: usize },
    #[error("metric is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("point {0:?} lies outside the domain")]
    OutOfDomain(Vec<f64>),
    #[error("field magnitude {magnitude:e} below support threshold {threshold:e}")]
    OutOfSupport { magnitude: f64, threshold: f64 },
    #[error("operation requires odd dimension, got {0}")]
    EvenDimension(usize),
    #[error("{0}")]
    InvalidDimension(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownField(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),
    #[error("incompatible boundary trace: {0}")]
    IncompatibleTrace(String),
    #[error("solver did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("invalid normalization: {0}")]
    InvalidNormalization(String),
    #[error("not eikonal: {0}")]
    NotEikonal(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
