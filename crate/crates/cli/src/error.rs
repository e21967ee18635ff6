use thiserror::Error;

/// A scenario syntax or name-resolution error at a 1-based position.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Failure while evaluating a binding or running a check.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Core(#[from] coiso_core::CoisoError),
    #[error("type error: {0}")]
    Type(String),
    #[error("{0}")]
    Invalid(String),
    #[error("binding `{name}` failed: {message}")]
    Binding { name: String, message: String },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

pub type EvalResult<T> = Result<T, EvalError>;
