use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("point lies outside the unit ball (norm {0})")]
    OutsideUnitBall(f64),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid radius {0}: must be positive and finite")]
    InvalidRadius(f64),

    #[error("index {index} out of range for {len} sensors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("pocket corruption did not reach the target fraction after {picks} seed picks")]
    DegenerateGraph { picks: usize },

    #[error("operation requires a linear target through the origin")]
    UnsupportedTarget,

    #[error("label budget exhausted")]
    BudgetExceeded,

    #[error("empty sample")]
    EmptySample,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("band around the current hypothesis contains no sensors (final width {width})")]
    EmptyBand { width: f64 },

    #[error("invalid kernel matrix: {0}")]
    InvalidKernel(String),

    #[error("degenerate dual solution: recovered direction is zero")]
    DegenerateSolution,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed csv {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than by a failing run.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
