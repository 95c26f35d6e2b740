use std::fmt;

use gowers_lab::Error;

/// Command failure, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Invalid flags, unreadable or malformed input, or input the computation rejects.
    Config(String),
    /// The predicted cost exceeds `--budget`.
    Budget(String),
    /// A requested check (`--assert-monotone`, `--bathtub-check`) failed.
    Assertion(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "{m}"),
            Failure::Budget(m) => write!(f, "{m}; raise --budget or lower --n"),
            Failure::Assertion(m) => write!(f, "assertion failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}
