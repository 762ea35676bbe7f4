use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("precision underflow: {0}")]
    PrecisionUnderflow(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("unsupported slope {0}")]
    UnsupportedSlope(String),
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("unsupported term: {0}")]
    UnsupportedTerm(String),
    #[error("wrong regularity: {0}")]
    WrongRegularity(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("transport pole at shift {shift}: alpha + {shift} + 1 = 0")]
    Pole { shift: usize },
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsupportedSlope(_)
            | Error::UnsupportedExponent(_)
            | Error::UnsupportedTerm(_)
            | Error::WrongRegularity(_) => 4,
            _ => 1,
        }
    }
}
