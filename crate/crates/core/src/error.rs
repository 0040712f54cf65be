use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition (asymptotic regime, minimum sample count, ...) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A sampling grid is too coarse for the requested evaluation.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A series or quadrature failed to reach its accuracy target.
    #[error("accuracy target not met: {what} (estimated error {estimate:e})")]
    Accuracy { what: String, estimate: f64 },

    /// The response data stop before decaying and no tail model was supplied.
    #[error("tail model required: S(t_max) = {last_value} exceeds {threshold}")]
    TailNeeded { last_value: f64, threshold: f64 },

    /// A spectrum integrand did not decay within the supplied time window.
    #[error("truncation error: |exp(-g(t_max))| = {estimate:e} exceeds {tolerance:e}")]
    Truncation { estimate: f64, tolerance: f64 },

    /// The data do not determine all model parameters.
    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    /// Every start of a fit failed to converge.
    #[error("fit did not converge ({starts} starts); best weighted cost {best_cost:e}")]
    NonConvergence { starts: usize, best_cost: f64 },

    /// A fit or tail estimate could not be formed from the data.
    #[error("fit error: {0}")]
    Fit(String),

    /// No registry entry carries the requested name.
    #[error("unknown preset '{name}'; available: {}", available.join(", "))]
    UnknownPreset { name: String, available: Vec<String> },

    /// Malformed input data.
    #[error("invalid data: {0}")]
    InvalidData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(format!("{name} must be finite, got {value}")))
    }
}
