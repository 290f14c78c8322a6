//! Errors reported by the CLI, each with its exit code.

use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppError {
    /// Short machine-readable category.
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl AppError {
    pub fn usage(message: impl Into<String>) -> Self {
        AppError {
            kind: "usage",
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        AppError {
            kind: "config",
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        AppError {
            kind: "io",
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }

    /// The record written to stderr: `{"error": {...}}` on one line.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for AppError {}

impl From<catsim::Error> for AppError {
    fn from(e: catsim::Error) -> Self {
        use catsim::Error as E;
        let (kind, exit_code) = match &e {
            E::Domain { .. } => ("domain", EXIT_DOMAIN),
            E::NoInterference => ("no_interference", EXIT_DOMAIN),
            E::NoViolation { .. } => ("no_violation", EXIT_DOMAIN),
            E::Unknown { .. } => ("config", EXIT_USAGE),
            E::Config(_) => ("config", EXIT_USAGE),
        };
        AppError {
            kind,
            message: e.to_string(),
            exit_code,
        }
    }
}
