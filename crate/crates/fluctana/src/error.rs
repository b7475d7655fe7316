//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid wavelet filter index {0}: expected an even integer in 2..=20")]
    InvalidFilter(usize),

    #[error("signal of length {len} is shorter than the filter support {support}")]
    SignalTooShort { len: usize, support: usize },

    #[error("scale {scale} exceeds the {max} usable levels for length {len}")]
    ScaleRange { scale: usize, max: usize, len: usize },

    #[error("decomposition metadata inconsistent: {0}")]
    Inconsistent(String),

    #[error("degenerate series for {0}: zero volatility")]
    DegenerateSeries(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("segment {index} at size {s} has zero variance; negative moments undefined")]
    DegenerateSegment { index: usize, s: usize },

    #[error("fit range error: {0}")]
    FitRange(String),

    #[error("q grid error: {0}")]
    Grid(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unfolding failed: {0}")]
    Unfolding(String),

    #[error("spacing-density fit failed: {0}")]
    Fit(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("ingest error: {0}")]
    Ingest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
