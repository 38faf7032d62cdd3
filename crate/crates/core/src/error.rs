use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("circuit contains a measurement; only unitary circuits can be simulated here")]
    MeasurementPresent,

    #[error("{what} limited to {max} qubits, got {got}")]
    TooManyQubits { what: &'static str, max: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed bitstring {0:?}")]
    MalformedBitstring(String),

    #[error("routing failed: {0}")]
    Routing(String),

    #[error("packing infeasible: {0}")]
    Packing(String),

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("executor failed: {0}")]
    Executor(String),

    #[error("unsupported gate for this operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
