use thiserror::Error;

#[derive(Debug, Error)]
pub enum MiaoError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("empty date range: {0}")]
    EmptyRange(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("fractional differencing order {0} outside [0, 1]")]
    FracOrder(f64),

    #[error("collinear regressors")]
    Collinear,

    #[error("residual covariance is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("missing series for project {0}")]
    MissingSeries(String),

    #[error("invalid window: {0}")]
    Window(String),

    #[error("missing score entry {0}")]
    MissingEntry(String),

    #[error("score table stage {from} cannot advance to {to}")]
    Stage { from: String, to: String },

    #[error("degenerate labels: {0}")]
    Labels(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MiaoError>;
