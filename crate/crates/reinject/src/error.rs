//! Error type shared by every module of the crate.
//!
//! Errors carry enough context to be printed directly by the command-line
//! harness, and each category maps to a distinct process exit code so shell
//! scripts can tell configuration mistakes from runtime failures.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failures the library can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid scenario text or parameter set. Carries the offending key and
    /// the 1-based line number when the problem came from a config document.
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    /// The simulation itself cannot run or produced no usable output.
    Simulation(String),
    /// Signal analysis was asked for something the data cannot support.
    Analysis(String),
    /// Reading or writing a file failed.
    Io { path: String, message: String },
}

impl Error {
    /// Config error with no source location (programmatic construction).
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    /// Config error tied to a key and config line.
    pub fn config_at(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line: Some(line),
            key: Some(key.into()),
            message: message.into(),
        }
    }

    pub fn simulation(message: impl Into<String>) -> Self {
        Error::Simulation(message.into())
    }

    pub fn analysis(message: impl Into<String>) -> Self {
        Error::Analysis(message.into())
    }

    pub fn io(path: impl Into<String>, err: &std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Process exit code the command-line harness uses for this error:
    /// 2 = configuration, 3 = simulation or I/O, 4 = analysis.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Simulation(_) => 3,
            Error::Analysis(_) => 4,
            Error::Io { .. } => 3,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { line, key, message } => {
                write!(f, "config error")?;
                if let Some(line) = line {
                    write!(f, " (line {line})")?;
                }
                if let Some(key) = key {
                    write!(f, " [{key}]")?;
                }
                write!(f, ": {message}")
            }
            Error::Simulation(message) => write!(f, "simulation error: {message}"),
            Error::Analysis(message) => write!(f, "analysis error: {message}"),
            Error::Io { path, message } => write!(f, "i/o error on {path}: {message}"),
        }
    }
}

impl std::error::Error for Error {}
