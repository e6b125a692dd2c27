use thiserror::Error;

/// Errors produced by the library.
///
/// Divergence of an integral or a norm is usually reported through a flag on
/// the result (so that grid searches can skip infeasible points); `Error`
/// variants are reserved for inputs that are outside the domain of an
/// operation or make it unanswerable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("unbounded quantile: q = {0} must lie in (0, 1]")]
    UnboundedQuantile(f64),

    #[error("infeasible hypothesis: {0}")]
    InfeasibleHypothesis(String),

    #[error("empty search space: {0}")]
    EmptySearchSpace(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
