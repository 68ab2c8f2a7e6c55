use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has {nodes} nodes, above the dense limit of {limit}; use the sketch-based path")]
    Capacity { nodes: usize, limit: usize },

    #[error("exhaustive search needs {required} subsets, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    #[error("degenerate Sherman-Morrison denominator {denominator:e} for edge {edge}")]
    Degenerate { edge: usize, denominator: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Capacity,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::InvalidArgument(_)
            | Error::Io(_)
            | Error::Csv(_) => ErrorClass::Input,
            Error::Capacity { .. } | Error::Budget { .. } => ErrorClass::Capacity,
            Error::Degenerate { .. } | Error::NotConverged { .. } => ErrorClass::Numerical,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
