use thiserror::Error;

/// Errors raised while evaluating, constructing or checking means.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanError {
    #[error("input {0} is outside the domain (must be positive and finite)")]
    NonPositiveInput(f64),

    #[error("non-finite result while evaluating {0}")]
    NumericOverflow(String),

    #[error("degenerate near-diagonal limit for {0}: guarded evaluation failed")]
    DegenerateLimit(String),

    #[error("conjugation moves {value} outside the domain of {mean}")]
    DomainError { mean: String, value: f64 },

    #[error("finite-difference stencil leaves the positive orthant at {0:?}")]
    StepUnderflow(Vec<f64>),

    #[error("base mean {id} is missing required properties: {missing}")]
    InvalidBaseMean { id: String, missing: String },

    #[error("no convergence after {iterations} iterations (last spread {spread:e})")]
    NoConvergence { iterations: usize, spread: f64 },

    #[error("no sign change on [{lo}, {hi}]: the three-variable mean is not strictly isotone here")]
    NoBracket { lo: f64, hi: f64 },

    #[error("fixed-point sequence lost monotonicity at step {step}")]
    NonIsotoneM { step: usize },

    #[error("M_z = {0} at the fixed point; implicit derivative undefined")]
    ContractionViolation(f64),

    #[error("type-2 relation does not hold at the requested pair (residual {0:e})")]
    Type2Mismatch(f64),

    #[error("unknown mean id {0:?}")]
    UnknownMean(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl MeanError {
    /// True for failures of an iterative or root-finding procedure, as opposed
    /// to bad input or configuration.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            MeanError::NoConvergence { .. }
                | MeanError::NoBracket { .. }
                | MeanError::NonIsotoneM { .. }
                | MeanError::ContractionViolation(_)
                | MeanError::DegenerateLimit(_)
                | MeanError::NumericOverflow(_)
                | MeanError::Type2Mismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, MeanError>;
