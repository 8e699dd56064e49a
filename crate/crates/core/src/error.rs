//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by contour construction, random-set evaluation, and model fitting.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum ImError {
    /// A numeric argument was outside its domain (probabilities, levels, counts, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A data vector had the wrong length or an impossible value for the model.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A confidence family probed during bisection was not nested in the level:
    /// membership flipped from out to in as the level increased.
    #[error("confidence family is not nested at level {alpha:.6}: {detail}")]
    NonNestedFamily { alpha: f64, detail: String },

    /// Monte Carlo work was requested with no replicates.
    #[error("Monte Carlo configuration requires at least one replicate")]
    NoReplicates,

    /// A model fit collapsed (zero variance, empty component, ...).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A fit inside a Monte Carlo loop failed; the replicate index is reported.
    #[error("fit failed in Monte Carlo replicate {replicate}: {detail}")]
    ReplicateFitFailure { replicate: usize, detail: String },

    /// A quantile or root search failed to bracket its target.
    #[error("numeric search failed: {0}")]
    SearchFailure(String),
}

impl ImError {
    pub fn invalid_parameter(msg: impl Into<String>) -> Self {
        ImError::InvalidParameter(msg.into())
    }

    pub fn invalid_data(msg: impl Into<String>) -> Self {
        ImError::InvalidData(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, ImError>;
