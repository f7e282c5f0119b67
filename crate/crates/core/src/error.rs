use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied configuration (grid counts, budgets, worker counts).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    /// Non-positive Jacobian determinant at one Gauss point of one element.
    #[error("degenerate element {element}: det J = {det:e} at gauss point {gauss_point}")]
    DegenerateElement {
        element: usize,
        gauss_point: usize,
        det: f64,
    },

    #[error("group {group} needs {required} bytes but the backend offers {capacity}")]
    Resource {
        group: usize,
        required: u64,
        capacity: u64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::DegenerateElement { .. }
            | Error::Resource { .. } => 2,
            Error::Io(_) => 3,
        }
    }
}
