use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("integer {0} is not squarefree")]
    NotSquarefree(i64),
    #[error("real quadratic field needs d > 1, got {0}")]
    BadDiscriminant(i64),
    #[error("the rationals have no fundamental unit")]
    NoFundamentalUnit,
    #[error("generators do not span a full-rank lattice")]
    RankDeficient,
    #[error("zero ideal")]
    ZeroIdeal,
    #[error("{0} is not totally positive")]
    NotTotallyPositive(String),
    #[error("ideal is not prime")]
    NotPrime,
    #[error("lattice is not normal (right order is not maximal)")]
    NotNormal,
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("norm equation n(x) = {target} has no solution with denominator <= {cap}")]
    DenominatorCapExceeded { target: String, cap: u32 },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
