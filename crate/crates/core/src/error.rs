use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector has no projective image")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid height range [{lo}, {hi})")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("radius {0} outside the admissible range")]
    RadiusOutOfRange(f64),

    #[error("point lies outside the support of the measure")]
    PointOutsideSupport,

    #[error("ball has zero measure")]
    DegenerateBall,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("packing failed: {0}")]
    PackingFailed(String),

    #[error("construction tree has no leaves")]
    EmptyTree,

    #[error("input is rational within the requested continued-fraction depth")]
    RationalInput,

    #[error("some vertices lie outside the ball")]
    PointsOutsideBall,

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
