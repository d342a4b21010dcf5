use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty mode selection")]
    EmptySelection,

    #[error("Fock truncation leakage {leakage:.3e} exceeds budget {budget:.3e} (increase n_trunc)")]
    LeakageExceeded { leakage: f64, budget: f64 },

    #[error("series expansion did not converge at order {order} (successive-order change {change:.3e}); gt*sqrt(E) too large")]
    SeriesNotConverged { order: usize, change: f64 },

    #[error("iterative extraction diverged at round {round}: residual grew for two consecutive rounds")]
    Diverged { round: usize },

    #[error("no shadow records")]
    NoRecords,

    #[error("missing estimate for pair ({0}, {1})")]
    MissingPair(usize, usize),

    #[error("initial-state family does not cover pair ({0}, {1})")]
    CoverageFailure(usize, usize),

    #[error("sample budget {budget} below the minimum {minimum}")]
    BudgetTooSmall { budget: u64, minimum: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
