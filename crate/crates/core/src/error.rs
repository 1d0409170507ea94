use thiserror::Error;

/// Errors raised by the numerical machinery.
///
/// Mathematical outcomes that are answers rather than failures (a divergent
/// integral, an unbounded supremum) are reported through result enums where
/// the caller is expected to branch on them; the variants here cover the
/// cases where a computation could not produce the requested quantity.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("no decaying envelope: {0}")]
    Envelope(String),

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error bound {error_bound:e})")]
    Accuracy { estimate: f64, error_bound: f64 },

    #[error("function is not in the Fock space (integral or supremum is infinite)")]
    NotInSpace,

    #[error("supremum is unbounded (log-value exceeded {log_value:.1} at |z| = {radius:e})")]
    Unbounded { log_value: f64, radius: f64 },

    #[error("integral diverges (growth exponent {growth_exponent:.3})")]
    Divergent { growth_exponent: f64 },

    #[error("numerical evidence is inconclusive: {0}")]
    Indeterminate(String),

    #[error("unsupported operator/space combination: {0}")]
    OutOfScope(String),

    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
