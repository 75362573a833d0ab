use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("working precision must be at least 16 digits, got {0}")]
    InvalidPrecision(u32),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("requested {requested} digits but the value only carries {available}")]
    Truncation { requested: usize, available: usize },

    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("expression uses more than one variable (`{first}` and `{second}`)")]
    MultipleVariables { first: char, second: char },

    #[error("evaluation failed in `{node}`: {reason}")]
    Evaluation { node: String, reason: String },

    #[error("Newton refinement of root {index} did not converge ({family} N={dimension})")]
    RootRefinementFailure {
        family: &'static str,
        dimension: usize,
        index: usize,
    },

    #[error("non-positive quadrature weight at node {index} ({family} N={dimension})")]
    WeightComputationFailure {
        family: &'static str,
        dimension: usize,
        index: usize,
    },

    #[error("corrupt mesh cache file {path}: {reason}")]
    CacheCorruption { path: PathBuf, reason: String },

    #[error("invalid scaling parameter: {0}")]
    InvalidScaling(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh has coincident points at indices {0} and {1}")]
    DegenerateMesh(usize, usize),

    #[error("Lagrange function index {index} out of range 1..={dimension}")]
    BadIndex { index: usize, dimension: usize },

    #[error("point {0} lies outside the open domain")]
    OutOfDomain(String),

    #[error("{solver} did not converge after {iterations} iterations")]
    ConvergenceFailure {
        solver: &'static str,
        iterations: usize,
    },

    #[error("shift is an exact eigenvalue; (A - mu I) is singular")]
    ShiftSingular,

    #[error("potential evaluation failed at mesh node {index}: {source}")]
    AssemblyFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("method `{method}` is not available for {reason}")]
    UnsupportedMethod {
        method: &'static str,
        reason: &'static str,
    },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by malformed user input rather than by the
    /// numerics.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidPrecision(_)
                | Error::Parse { .. }
                | Error::UnknownFunction { .. }
                | Error::MultipleVariables { .. }
                | Error::InvalidScaling(_)
                | Error::InvalidDomain(_)
                | Error::BadIndex { .. }
                | Error::OutOfDomain(_)
                | Error::UnsupportedMethod { .. }
                | Error::InvalidOption(_)
                | Error::Truncation { .. }
        )
    }
}

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Two or more returned eigenvalues could not be separated at the
    /// working precision.
    Cluster { first: usize, last: usize },
    /// The shifted potential is not positive at every node; the partial
    /// solver needs a spectrum bounded away from zero on one side.
    ShiftAdvisory { min_diagonal: String },
    /// A cache file was unreadable and has been recomputed.
    CacheRebuilt { path: PathBuf, reason: String },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Cluster { first, last } => {
                write!(f, "levels {first}..={last} form an unresolved cluster")
            }
            Warning::ShiftAdvisory { min_diagonal } => write!(
                f,
                "min(V(x_i) + PS) = {min_diagonal} is not positive; consider a larger --shift"
            ),
            Warning::CacheRebuilt { path, reason } => {
                write!(f, "recomputed corrupt cache file {} ({reason})", path.display())
            }
        }
    }
}
