use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series truncation exhausted: coefficient of z^{power} requested, known only down to z^{known}")]
    TruncationExhausted { power: i64, known: i64 },
    #[error("series has wrong leading term: {0}")]
    WrongLeadingTerm(String),
    #[error("initial data too shallow: depth {have} available, {need} required")]
    InsufficientDepth { have: usize, need: usize },
    #[error("non-zero coefficient at non-negative power {0:?} of the N-point series")]
    NonPrincipal(Vec<i64>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("root finding did not converge after {0} iterations")]
    RootsNotConverged(usize),
    #[error("spectral curve is singular: branch points {0} and {1} coincide")]
    DoublePoint(usize, usize),
    #[error("no non-crossing cut system found")]
    NoCutSystem,
    #[error("ill-conditioned normalization system (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("divisor point {0} lies on or too close to a branch cut")]
    DivisorOnCut(usize),
    #[error("real part of the period matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("base point lies on the theta divisor (|theta| = {0:.3e})")]
    ThetaDivisor(f64),
    #[error("zero constant term in formal logarithm")]
    ZeroConstant,
    #[error("parse error: {0}")]
    Parse(String),
}
