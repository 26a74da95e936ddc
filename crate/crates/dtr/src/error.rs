use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action must be -1 or +1, got {value} ({context})")]
    InvalidAction { value: f64, context: String },

    #[error("propensity must lie strictly in (0, 1), got {value} ({context})")]
    InvalidPropensity { value: f64, context: String },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("stage {stage} out of range 1..={n_stages}")]
    StageOutOfRange { stage: usize, n_stages: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("trajectories disagree on shape: {0}")]
    RaggedDataset(String),

    #[error("all sample weights are zero")]
    AllWeightsZero,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("no subject follows the estimated optimal rules after stage {stage}")]
    NoFollowers { stage: usize },

    #[error("no eligible subjects at stage {stage}")]
    DegenerateStage { stage: usize },

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("cannot split {rows} rows into {folds} folds")]
    DegenerateFolds { folds: usize, rows: usize },

    #[error("zero propensity for subject {subject} at stage {stage}")]
    ZeroPropensity { subject: usize, stage: usize },

    #[error("unsupported document version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
