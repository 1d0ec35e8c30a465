use thiserror::Error;

/// Errors produced by generation, oracle, solver, and harness code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact oracle was asked to enumerate more subsets than its budget
    /// allows. Exact mode refuses instead of silently sampling.
    #[error(
        "enumeration budget exceeded: {needed} subsets/pairs at sparsity {s} exceed the budget \
         of {budget}; use the sampled estimators (delta_sampled / theta_sampled) instead"
    )]
    BudgetExceeded { needed: u128, s: usize, budget: u64 },

    /// A check needs restricted-isometry constants that were neither supplied
    /// nor computable.
    #[error("missing restricted-isometry constants: supply theta/delta explicitly or enable oracle mode")]
    MissingRipConstants,

    /// The iteration produced a non-finite value.
    #[error("numerical failure: non-finite values in iterate {t}")]
    NumericalFailure { t: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
