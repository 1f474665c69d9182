use thiserror::Error;

/// Errors produced by signal synthesis, filtering, network simulation and
/// experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("scenario events must be strictly increasing in `at` (event {index} at {at} follows {previous})")]
    UnsortedEvents {
        index: usize,
        at: usize,
        previous: usize,
    },

    #[error("stream too short: need at least {needed} samples, got {got}")]
    StreamTooShort { needed: usize, got: usize },

    #[error("degenerate weight state: |h|^2 + |g|^2 + gamma = 0")]
    DegenerateState,

    #[error("topology is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: usize },

    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular widely-linear system (determinant {0:e})")]
    SingularSystem(f64),

    #[error("covariance matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("every sample in the steady-state window of node {node} is flagged invalid")]
    AllInvalid { node: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
