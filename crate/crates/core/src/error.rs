use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration exhausted its budget, or the result is not representable.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// An infinite series could not be certified to the requested tolerance.
    #[error(
        "series not certified after {terms} terms: tail half-width {half_width:e} exceeds {abs_tol:e}"
    )]
    Truncation {
        terms: usize,
        half_width: f64,
        abs_tol: f64,
    },

    /// Ruin is certain when the premium does not exceed the expected claim.
    #[error("safety loading must be positive for a solvent model, got theta = {theta}")]
    Solvency { theta: f64 },

    /// A simulation would need a deeper truncation than configured.
    #[error(
        "simulation needs depth {required} to certify its bias, configured depth is {configured}"
    )]
    Depth { required: usize, configured: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
