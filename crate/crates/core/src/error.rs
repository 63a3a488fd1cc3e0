use thiserror::Error;

/// Errors surfaced by the modeling, simulation, and estimation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is structurally invalid (e.g. empty pool, bad policy).
    #[error("configuration error: {0}")]
    Config(String),

    /// A conditioning set came up empty, so the requested statistic is undefined.
    #[error("empty conditioning set: {0}")]
    EmptyConditioningSet(String),

    /// Numerical failure (underflow, singular system, divergence).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The optimizer failed to converge from any start.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    /// Input data violates a dataset invariant.
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
