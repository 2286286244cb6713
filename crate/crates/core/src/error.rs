use thiserror::Error;

/// Errors raised by the analysis routines and the system-file loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("map index {index} exceeds the sequence horizon {horizon}")]
    Horizon { index: usize, horizon: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fixed points of F_[1,{n}] are not isolated: the graph lies on the diagonal over [{lo}, {hi}]")]
    NonIsolatedFixedPoints { n: usize, lo: f64, hi: f64 },

    #[error("length {n} is not a multiple of the period {period}")]
    UnsupportedLength { n: usize, period: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error(
        "not chain mixing: the reachable set of node {node} does not saturate within {steps} steps"
    )]
    NotChainMixing { node: usize, steps: usize },

    #[error("unknown fixture `{name}`; available: {available}")]
    UnknownFixture { name: String, available: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of the analysis itself, as opposed to bad input or configuration.
    pub fn is_analysis(&self) -> bool {
        matches!(
            self,
            Error::NonIsolatedFixedPoints { .. }
                | Error::NoConvergence { .. }
                | Error::NotChainMixing { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
