use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const MISSING_INPUT: i32 = 2;
    pub const INVALID_INPUT: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// A diagnostic with its exit code. The message is kept on one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        let message: String = message.into();
        let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
        Self { code, message }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self::new(exit::MISSING_INPUT, message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(exit::INVALID_INPUT, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(exit::NUMERICAL, message)
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error: {}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
