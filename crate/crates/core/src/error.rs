use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("form [{a}, {b}, {c}] is not positive definite")]
    NotPositiveDefinite { a: i64, b: i64, c: i64 },

    #[error("precision of {0} bits is below the supported minimum of {1} bits")]
    PrecisionTooLow(usize, usize),

    #[error("requested accuracy cannot be certified: {0}")]
    PrecisionUnachievable(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("unsupported weight {0}")]
    UnsupportedWeight(i64),

    #[error("unsupported Bessel order {0}")]
    UnsupportedOrder(String),

    #[error("coefficient at exponent {exponent} requested but series is only known below {trunc}")]
    Truncated { exponent: String, trunc: String },

    #[error("division by a series whose leading coefficient is zero")]
    ZeroLeadingTerm,

    #[error("constant coefficient must vanish, found {0}")]
    NonzeroConstant(String),

    #[error("invalid principal part: {0}")]
    InvalidPrincipalPart(String),

    #[error("plus-space solve failed: {0}")]
    SolveFailed(String),

    #[error("rounding not certified: residual {residual:e} exceeds {threshold:e}")]
    Uncertified { residual: f64, threshold: f64 },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("inconsistent discriminant form: {0}")]
    InconsistentDiscForm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
