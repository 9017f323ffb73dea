use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("form is not positive definite")]
    NotPositiveDefinite,

    #[error("zero vector not allowed here")]
    ZeroVector,

    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),

    #[error("minimal vectors do not span R^{0}")]
    MinimaNotSpanning(usize),

    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("selected columns are rank deficient")]
    RankDeficient,

    #[error("degree {0} out of range")]
    DegreeOutOfRange(usize),

    #[error("not a chain complex: boundary composition nonzero in degree {0}")]
    NotAComplex(usize),

    #[error("argument out of supported range: {0}")]
    OutOfRange(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("convention error: {0}")]
    Convention(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Precision and assertion-type failures, as opposed to bad input.
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            Error::Precision(_)
                | Error::Internal(_)
                | Error::Convention(_)
                | Error::BoundViolation(_)
                | Error::NotAComplex(_)
        )
    }
}
