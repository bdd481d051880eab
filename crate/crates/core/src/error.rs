use thiserror::Error;

/// Errors produced by the metric stack, the bound machinery, and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside a function's domain (non-finite, wrong sign,
    /// out of range).
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    /// No point in the searched region satisfies the constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A numeric failure inside an optimization routine (non-finite objective,
    /// coefficient overflow).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Rejection sampling for litter words exhausted its attempt budget.
    #[error("litter generation infeasible after {attempts} attempts per word")]
    LitterExhausted { attempts: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
