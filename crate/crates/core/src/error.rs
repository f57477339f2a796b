use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("no geodesic between the given points: {0}")]
    NoGeodesic(String),
    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("operation not supported on this space: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
