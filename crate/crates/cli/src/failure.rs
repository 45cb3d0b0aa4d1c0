//! Exit codes: 0 success, 1 mathematical violation, 2 usage or config
//! error, 3 resource exhaustion.

use nilwalk::Error;

pub const VIOLATION: u8 = 1;
pub const USAGE: u8 = 2;
pub const RESOURCE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: VIOLATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceExhausted { .. } => RESOURCE,
            Error::Unvalidated(_) | Error::InvarianceViolation(_) | Error::SolverFailure { .. } => VIOLATION,
            _ => USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::usage(e.to_string())
    }
}
