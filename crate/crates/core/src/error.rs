use thiserror::Error;

/// Errors returned by the lattice, KEM, SAP and registry layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parameter set mismatch: expected {expected}, got {actual}")]
    ParamMismatch { expected: String, actual: String },

    #[error("unknown parameter set `{0}`")]
    UnknownParamSet(String),

    #[error("byte stream exhausted: needed {needed} bytes, had {available}")]
    StreamUnderflow { needed: usize, available: usize },

    #[error("uniform sampler gave up after {0} candidates")]
    SamplerExhausted(usize),

    #[error("cursor {cursor} is past the end of the registry ({len} entries)")]
    CursorOutOfRange { cursor: u64, len: u64 },

    #[error("unsupported view tag width {0} (expected 0, 1 or 32)")]
    ViewTagWidth(usize),

    #[error("registry record {index}: {reason}")]
    CorruptRecord { index: u64, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
