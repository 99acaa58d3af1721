use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient overflow at index {index}")]
    CoefficientOverflow { index: usize },

    #[error("truncation threshold {threshold:e} unreachable: minimal term {min_term:e} at index {index}")]
    ThresholdUnreachable {
        threshold: f64,
        min_term: f64,
        index: usize,
    },

    #[error("degenerate model curve: (l5^2 - 8t)(l5^2 - 48t) vanishes (l5 = {lambda5})")]
    DegenerateCurve { lambda5: num_complex::Complex64 },

    #[error("branch tracking failed at continuation parameter {at}")]
    BranchTracking { at: f64 },

    #[error("|x| = {modulus} is inside the excluded radius {radius}")]
    InsideRadius { modulus: f64, radius: f64 },

    #[error("difference is not exponentially small here (rate {rate})")]
    NotExponentiallySmall { rate: f64 },

    #[error("query {query} outside interval [{left}, {right}]")]
    OutOfInterval { query: f64, left: f64, right: f64 },

    #[error("singular linear solve (pivot {pivot:e} in column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("signal below noise floor: {0}")]
    BelowNoiseFloor(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
