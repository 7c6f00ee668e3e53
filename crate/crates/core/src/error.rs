use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("algebra is not associative at basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("map is not a homomorphism on basis pair ({0}, {1})")]
    NotHomomorphism(usize, usize),
    #[error("weight is not submultiplicative at ({0}, {1})")]
    NotSubmultiplicative(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not an idempotent (defect {0})")]
    NotIdempotent(String),
    #[error("symbol cannot be represented on this model: {0}")]
    Unrepresentable(String),
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
