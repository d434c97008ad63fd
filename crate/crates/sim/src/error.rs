use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Configuration rejected before simulation starts; the message names the
    /// offending field or section.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Inconsistent runtime state; the run halts.
    #[error("simulation integrity violated: {0}")]
    Integrity(String),

    /// A quantum deployment unit cannot be fit onto the node even with cuts.
    #[error("infeasible unit: {0}")]
    InfeasibleUnit(String),

    /// A warm-start pipeline whose step formats do not chain.
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
