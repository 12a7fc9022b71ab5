use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("cohort has {0} user(s); n >= 2 required")]
    CohortTooSmall(usize),

    /// `sum_i a_i - max_i a_i` is not strictly positive.
    #[error("no amplification guarantee: weight denominator is {0}")]
    NoAmplification(f64),

    /// `|n - 2B|` vanishes, so the frequency debiasing step is undefined.
    #[error("non-identifiable frequency estimate: |n - 2B| = {0}")]
    NonIdentifiable(f64),

    #[error("epsilon = 0 is a non-informative budget, not supported by the Laplace mechanism")]
    NonInformativeBudget,

    #[error("could not bracket epsilon for target delta {0}")]
    BracketFailure(f64),

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("exact enumeration over n = {n} users exceeds the limit of {limit}")]
    EnumerationTooLarge { n: usize, limit: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors raised by a mathematical guard rather than by malformed
    /// input: the inputs are valid but the requested quantity does not exist.
    pub fn is_math_guard(&self) -> bool {
        matches!(
            self,
            Error::NoAmplification(_) | Error::NonIdentifiable(_) | Error::SingularCovariance
        )
    }
}
