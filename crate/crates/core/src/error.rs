use thiserror::Error;

/// Crate-wide error type. Variants map onto the failure modes the public
/// operations are contracted to surface; the CLI maps them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("non-unimodular element: {0}")]
    NonUnimodular(String),

    #[error("illegal move by {role} at round {round}: {reason}")]
    IllegalMove {
        role: &'static str,
        round: usize,
        reason: String,
    },

    #[error("move family budget exceeded at (n={n}, i={i}): {count} balls > budget {budget}")]
    BudgetExceeded {
        n: usize,
        i: usize,
        count: usize,
        budget: String,
    },

    #[error("diffuseness oracle violation: {0}")]
    OracleViolation(String),

    #[error("no admissible parameters: {0}")]
    ParamInfeasible(String),

    #[error("subgame extraction gap: {0}")]
    ExtractionGap(String),

    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
