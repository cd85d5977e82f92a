use std::fmt;

use lglg_core::Error;

/// A command failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid configuration, grid or arguments (exit 2).
    Config(String),
    /// Unreadable or inconsistent data: manifests, images, models (exit 3).
    Data(String),
    /// Filesystem failures outside per-record loading (exit 4).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Io(m) => m,
        }
    }
}

/// Single line: `error[<kind>]: <message>`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: String = self
            .message()
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        write!(f, "error[{}]: {}", self.kind(), flat)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParams(_)
            | Error::InvalidIndex { .. }
            | Error::ConfigMismatch => CliError::Config(msg),
            Error::Io(_) => CliError::Io(msg),
            _ => CliError::Data(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
