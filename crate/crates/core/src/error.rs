use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative evaluation hit its iteration cap.
    #[error("{what} did not converge after {iterations} iterations (last relative change {last_change:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    /// A computation produced a non-finite value or otherwise broke down.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The nested-quadrature path only covers small dimensions.
    #[error("nested quadrature supports 1 <= v <= 6 but v = {0}; use the Monte Carlo estimator instead")]
    Capability(usize),

    /// Rejection sampling kept no sample at all.
    #[error("no sample fell inside the ball (rho = {rho}, n_total = {n_total}); rho is too small for this budget")]
    DegenerateAcceptance { rho: f64, n_total: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_finite(what: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("{what} evaluated to {x}")))
    }
}
