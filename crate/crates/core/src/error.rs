use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed netpbm file: {0}")]
    PnmFormat(String),

    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("unknown glyph label {0}")]
    UnknownLabel(u32),

    #[error("page overflow: glyph at ({x}, {y}) exceeds canvas {width}x{height}")]
    PageOverflow {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("line band {y0}..={y1} out of page bounds (height {height})")]
    LineOutOfBounds { y0: usize, y1: usize, height: usize },

    #[error("cannot normalize an empty word crop")]
    EmptyCrop,

    #[error("feature frame length {got} does not match network input size {expected}")]
    FrameLengthMismatch { got: usize, expected: usize },

    #[error("non-finite value in network input")]
    NonFiniteInput,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u32, classes: usize },

    #[error("no alignment of {labels} labels ({min_frames} frames required) fits in {frames} frames")]
    InfeasibleAlignment {
        labels: usize,
        min_frames: usize,
        frames: usize,
    },

    #[error("forward cache does not match the network's current parameters")]
    StaleCache,

    #[error("empty {0}")]
    EmptyInput(&'static str),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("malformed n-gram model file: {0}")]
    LmFormat(String),

    #[error("malformed ground-truth file: {0}")]
    GroundTruthFormat(String),

    #[error("malformed transcript file: {0}")]
    TranscriptFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("evaluation input mismatch: {0}")]
    EvalMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
