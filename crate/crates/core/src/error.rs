use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cluster {cluster} received no nodes")]
    EmptyBlock { cluster: usize },

    #[error("pair rate {rate} exceeds the configured cap {cap}")]
    RateOverflow { rate: f64, cap: f64 },

    #[error("feature mode {mode} is incompatible with k = {k}, k_f = {k_f}")]
    ModeMismatch { mode: String, k: usize, k_f: usize },

    #[error("label vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("evaluation mask selects no nodes")]
    EmptyMask,

    #[error("at least 2 samples are required, got {got}")]
    TooFewSamples { got: usize },

    #[error("degenerate clusters: {0}")]
    DegenerateClusters(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("class {class} has {size} members, {required} required")]
    ClassTooSmall {
        class: usize,
        size: usize,
        required: usize,
    },

    #[error("split leaves no test nodes")]
    EmptyTest,

    #[error(
        "feature NMI does not bracket the graph NMI {target:.4} (low end {low:.4}, high end {high:.4})"
    )]
    NotBracketed { target: f64, low: f64, high: f64 },

    #[error("graph-only NMI {graph_nmi:.4} is at chance level or perfect; nothing to calibrate against")]
    CalibrationPrecondition { graph_nmi: f64 },

    #[error("every trial failed for {param} = {value}, method {method}")]
    AllTrialsFailed {
        param: String,
        value: f64,
        method: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_)
            | Error::Config(_)
            | Error::ModeMismatch { .. }
            | Error::Json(_)
            | Error::CalibrationPrecondition { .. }
            | Error::NotBracketed { .. } => 2,
            Error::Io { .. } | Error::Schema(_) | Error::Validation(_) | Error::Csv(_) => 4,
            _ => 3,
        }
    }
}
