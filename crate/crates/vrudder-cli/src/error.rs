//! Error taxonomy of the front end: configuration problems exit with code
//! 2, numerical failures with code 3, output I/O with code 1, and every
//! failure prints one machine-parseable record.

use std::fmt;

/// A front-end failure with a stable exit code and kind tag.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, unparseable, or invalid configuration.
    Config(String),
    /// The requested computation failed (synthesis infeasible, loop
    /// unstable, solver breakdown).
    Numerical(String),
    /// Output files could not be written.
    Io(String),
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        Self::Config(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        Self::Numerical(msg.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Numerical(_) => "numerical",
            Self::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numerical(m) | Self::Io(m) => m,
        }
    }

    /// Single-line machine-parseable error record.
    pub fn record(&self) -> String {
        format!(
            "ERROR code={} kind={} msg=\"{}\"",
            self.exit_code(),
            self.kind(),
            self.message().replace('"', "'").replace('\n', " ")
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
