use thiserror::Error;

/// Errors produced by design, tuning and measurement routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A warping coefficient outside the stable range.
    #[error("warping coefficient {0} outside (-1, 1) or beyond the |alpha| <= 0.9999 guard band")]
    Domain(f64),

    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    /// No (alpha, M) pair reaches the requested target.
    #[error("tuning infeasible: {0}")]
    TuningInfeasible(String),

    /// Decimation would push the stretched band past Nyquist.
    #[error("range error: {0}")]
    Range(String),

    #[error("response is not bandpass: {0}")]
    NotBandpass(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
