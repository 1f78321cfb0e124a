//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the domain of an operation (boundary of a
    /// transform, invalid model parameter, negative probability, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity that must be finite was NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// Every particle weight vanished at the given filter step.
    #[error("particle filter degenerated at step {step} (all weights zero)")]
    DegenerateFilter { step: usize },

    /// A chain, trace or input was unusable for the requested computation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Mismatched dimensions or an inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge (residual estimate {residual:e})")]
    QuadratureNonConvergence { residual: f64 },

    /// A matrix factorization failed (not symmetric positive definite).
    #[error("linear algebra error: {0}")]
    LinAlg(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }
}
