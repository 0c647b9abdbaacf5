use std::fmt;
use std::path::Path;

use paradox_core::Error;

/// Exit codes: 1 bad parameters, 2 bad input, 3 no numerical convergence.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn param(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn output(path: &Path, e: std::io::Error) -> Self {
        CliError { code: 2, message: format!("cannot write {}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_) | Error::Range { .. } | Error::Consistency(_) => 1,
            Error::Parse { .. } | Error::Domain(_) | Error::Io(_) => 2,
            Error::NonConvergence { .. } => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
