//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration value is invalid or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A numeric quantity became NaN or infinite mid-computation.
    #[error("non-finite value in {context} (sample {sample_index:?})")]
    NonFinite { context: String, sample_index: Option<usize> },

    /// Two agents collided (pairwise distance reached zero), so the
    /// interaction potential and features are undefined. Rollouts fill in
    /// the step at which it happened.
    #[error("agent collision: agents {i} and {j} coincide{}", .step.map_or_else(String::new, |s| format!(" at step {s}")))]
    Singularity { i: usize, j: usize, step: Option<usize> },

    /// Rejection sampling failed to place all agents within the attempt
    /// budget; the disc is too crowded for the requested spacing.
    #[error("placement failed after {attempts} attempts: cannot fit {n} agents at min distance {min_dist}")]
    Placement { n: usize, min_dist: f64, attempts: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
