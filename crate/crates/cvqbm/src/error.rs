use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants map onto the failure classes the CLI
/// reports through its exit codes (config = 2, numerical = 3, assertion = 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("squeezing out of range: |r| = {0} exceeds 2.5; truncation unreliable")]
    SqueezingOutOfRange(f64),

    #[error("degenerate post-selection{}: outcome probability {prob:.3e} below 1e-14{}",
        .step.map(|s| format!(" at step {s}")).unwrap_or_default(),
        .probe.as_ref().map(|p| format!(" (probe params {p:?})")).unwrap_or_default())]
    DegeneratePostSelection {
        prob: f64,
        step: Option<usize>,
        probe: Option<Vec<f64>>,
    },

    #[error("cutoff insufficient: captured norm fraction {captured:.6} below 0.9")]
    CutoffInsufficient { captured: f64 },

    #[error("gradient unavailable: post-selection stays degenerate around coordinate {coordinate}")]
    GradientUnavailable { coordinate: usize },

    #[error("initialization failed: all {attempts} random restarts hit degenerate post-selection")]
    InitializationFailed { attempts: usize },

    #[error("parse error{}: {message}",
        match (.line, .column, .offset) {
            (Some(l), Some(c), _) => format!(" at line {l}, column {c}"),
            (_, _, Some(o)) => format!(" at byte offset {o}"),
            _ => String::new(),
        })]
    Parse {
        message: String,
        offset: Option<usize>,
        line: Option<usize>,
        column: Option<usize>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("assertion failed: {0}")]
    AssertionFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn degenerate(prob: f64) -> Self {
        Error::DegeneratePostSelection { prob, step: None, probe: None }
    }

    pub fn with_step(self, step: usize) -> Self {
        match self {
            Error::DegeneratePostSelection { prob, probe, .. } => {
                Error::DegeneratePostSelection { prob, step: Some(step), probe }
            }
            other => other,
        }
    }

    pub fn with_probe(self, probe: Vec<f64>) -> Self {
        match self {
            Error::DegeneratePostSelection { prob, step, .. } => {
                Error::DegeneratePostSelection { prob, step, probe: Some(probe) }
            }
            other => other,
        }
    }

    /// Exit code the CLI reports for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config { .. } => 2,
            Error::AssertionFailed(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
