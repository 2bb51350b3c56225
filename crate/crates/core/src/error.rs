use thiserror::Error;

#[derive(Debug, Error)]
pub enum FmmError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line {line}: {msg}")]
    ParseLine { line: usize, msg: String },
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("straight-line program: {0}")]
    Slp(String),
    #[error("missing binding for input '{0}'")]
    MissingBinding(String),
    #[error("program is not linear (contains product '{0}')")]
    NotLinear(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("alternative-basis data absent for scheme '{0}'")]
    NoAltBasis(String),
    #[error("non-finite input value")]
    NonFinite,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FmmError>;
