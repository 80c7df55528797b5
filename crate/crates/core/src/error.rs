use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("malformed scenario: {0}")]
    Structure(String),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("missing data entry for (k={k}, s={s}, t={t})")]
    MissingKey { k: String, s: String, t: String },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("polytope is unbounded")]
    UnboundedPolytope,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("row budget of {budget} exceeded after {eliminated} eliminations ({rows} rows)")]
    BudgetExceeded {
        budget: usize,
        rows: usize,
        eliminated: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent solution: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
