//! Exit codes, a stable contract:
//! 0 success (or existence for `classify`), 1 nonexistence, 2 inconclusive
//! or regime mismatch, 64 bad configuration, 65 bad CSV, 70 solver
//! failure, 74 I/O failure.

use std::fmt;
use std::path::Path;

use gm_exterior::Error;

pub const NONEXISTENCE: u8 = 1;
pub const INCONCLUSIVE: u8 = 2;
pub const CONFIG: u8 = 64;
pub const DATA: u8 = 65;
pub const SOLVER: u8 = 70;
pub const IO: u8 = 74;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(CONFIG, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(DATA, message)
    }

    /// Library errors: parameter problems are the caller's fault, the rest
    /// are solver failures and carry the error tag.
    pub fn library(e: &Error) -> Self {
        match e.root() {
            Error::InvalidParameter(_) | Error::UnknownKind(_) | Error::InvalidGrid(_) => Self::config(format!("{}: {e}", e.tag())),
            _ => Self::new(SOLVER, format!("{}: {e}", e.tag())),
        }
    }

    pub fn with_context(mut self, context: &str) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(IO, format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
