use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A gate or circuit references qubits that do not exist, or is otherwise
    /// structurally unusable.
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    /// An operation was called with arguments that violate its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A cut plan does not apply to the circuit it was paired with.
    #[error("invalid cut plan: {0}")]
    InvalidPlan(String),

    /// Reconstruction was attempted without results for every combination.
    #[error("incomplete results: {0}")]
    IncompleteResults(String),

    /// A fragment execution failed; the failing combination is identified.
    #[error("executor failed on combination {combination}: {source}")]
    ExecutorFailure {
        combination: usize,
        #[source]
        source: Box<CoreError>,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
