use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map one-to-one onto the CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain (bad vertex label,
    /// probability outside `(0, 1)`, empty sample, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of a bound evaluator does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The request exceeds a supported size (exhaustive enumeration ceiling,
    /// pattern vertex span, ...).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A numerical routine produced a non-finite value or failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Malformed experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the `tristein` binary:
    /// 1 usage, 2 config, 3 capacity, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Precondition(_) | Error::Parse(_) => 1,
            Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Capacity(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("p = {p} is not in the open interval (0, 1)")))
    }
}

pub(crate) fn check_vertex_count(n: usize) -> Result<()> {
    if n >= 3 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("n = {n}: at least three vertices are required")))
    }
}
