use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration has {got} joints, robot {robot} has {expected}")]
    DimensionMismatch {
        robot: usize,
        expected: usize,
        got: usize,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed ({invariant}): {element}")]
    Validation { invariant: String, element: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("motion planning failed for {task}: {reason}")]
    Planning { task: String, reason: String },
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("unknown robot {0} in pause script")]
    UnknownRobot(usize),
}

impl Error {
    pub fn validation(invariant: impl Into<String>, element: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.into(),
            element: element.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the command-line front end; one per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Parse(_) | Error::Validation { .. } | Error::DimensionMismatch { .. } => 4,
            Error::Infeasible(_) => 5,
            Error::Planning { .. } => 6,
            Error::Internal(_) => 7,
            Error::UnknownRobot(_) => 8,
        }
    }
}
