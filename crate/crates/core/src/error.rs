use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("model is not causal: stability margin {margin} >= 0")]
    Unstable { margin: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("horizon must be {expected}, got {h}")]
    NegativeHorizon { h: f64, expected: &'static str },
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("Levy covariance is not positive definite (min eigenvalue {min_eig:e})")]
    NotStrict { min_eig: f64 },
    #[error("operation requires an order-1 (Ornstein-Uhlenbeck) model, got p = {p}")]
    WrongOrder { p: usize },
    #[error("vertex sets disagree: {left} vs {right} vertices")]
    VertexMismatch { left: usize, right: usize },
    #[error("vertex {vertex} out of range 1..={n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("invalid separation query: {0}")]
    QueryInvalid(String),
    #[error("graph too large for the brute-force oracle: n = {n} > 8")]
    TooLarge { n: usize },
    #[error("bad Levy driver: {0}")]
    BadDriver(String),
    #[error("covariance factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("residual variance of component {component} is degenerate ({variance:e})")]
    DegenerateVariance { component: usize, variance: f64 },
    #[error("regressor matrix is rank deficient")]
    RankDeficient,
    #[error("not enough observations: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("spectral block is numerically singular at lambda = {lambda}")]
    SingularBlock { lambda: f64 },
    #[error("resolvent is singular at lambda = {lambda}")]
    SingularResolvent { lambda: f64 },
    #[error("linear system is singular")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
