use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Input data violates a structural requirement (ordering, ranges, columns).
    #[error("data error: {0}")]
    Data(String),

    /// Caller supplied arguments outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameters violate model constraints: {0}")]
    Constraint(String),

    /// The recursion produced a non-positive or non-finite conditional mean.
    #[error("invalid filter state at index {index}: {reason}")]
    InvalidState { index: usize, reason: String },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("singular Hessian, flat direction along `{0}`")]
    SingularHessian(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by input data rather than numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Data(_))
    }
}
