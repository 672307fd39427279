use thiserror::Error;

/// Errors shared by every module. The variant name is what the CLI reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("SingularMatrix: {0}")]
    SingularMatrix(String),
    #[error("BadShape: {0}")]
    BadShape(String),
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("OddColumn: {0}")]
    OddColumn(String),
    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),
    #[error("Infeasible: {0}")]
    Infeasible(String),
    #[error("TooLarge: {0}")]
    TooLarge(String),
    #[error("UnsupportedK: {0}")]
    UnsupportedK(usize),
    #[error("NotPrime: {0}")]
    NotPrime(u32),
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::SingularMatrix(_) => "SingularMatrix",
            Error::BadShape(_) => "BadShape",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::OddColumn(_) => "OddColumn",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::Infeasible(_) => "Infeasible",
            Error::TooLarge(_) => "TooLarge",
            Error::UnsupportedK(_) => "UnsupportedK",
            Error::NotPrime(_) => "NotPrime",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
