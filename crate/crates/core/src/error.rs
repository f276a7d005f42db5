use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{n} qubits exceeds the cap of {cap} for this operation")]
    QubitCapExceeded { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field vector is not identically zero; symmetry reduction needs h = 0")]
    NonZeroField,

    #[error("raw dataset length {0} bytes is not of the form 8(n^2 + n)")]
    BadDatasetLength(usize),

    #[error("propagator needs degree {needed} to reach tolerance {tol:e}, cap is {cap}")]
    ToleranceUnreachable { needed: usize, cap: usize, tol: f64 },

    #[error("ratio {ratio} lies outside the hardware schedule range [{min}, {max}]")]
    RatioOutOfRange { ratio: f64, min: f64, max: f64 },

    #[error("hardware schedule A/B ratio is not monotone near s = {0}")]
    NonMonotoneSchedule(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("curation acceptance rate {rate:e} after {attempts} attempts is below 1e-5")]
    AcceptanceTooLow { rate: f64, attempts: usize },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
