use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A state-family or grid parameter is outside its valid range.
    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// The operation is only defined for equal priors.
    #[error("operation requires equal priors (q = 1/2), got q = {q}")]
    UnsupportedPrior { q: f64 },

    /// A copy count exceeds the configured solve ceiling.
    #[error("{what} for {requested} copies exceeds the ceiling of {ceiling}")]
    SizeLimit {
        what: &'static str,
        requested: usize,
        ceiling: usize,
    },

    /// Bayesian update conditioned on an outcome of zero probability.
    #[error("impossible outcome: Pr[d | p = {p}, phi = {phi}] = 0")]
    ImpossibleOutcome { p: f64, phi: f64 },

    /// A scalar or alternating minimization failed to converge.
    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    /// The extrapolation design matrix is rank-deficient.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A numeric result left its valid range.
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}
