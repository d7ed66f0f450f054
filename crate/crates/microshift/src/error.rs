use std::io;
use thiserror::Error;

/// Errors produced by the codec, its file formats, and the decoders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("malformed header: {0}")]
    BadHeader(String),

    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty observation list")]
    NoObservations,

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("bitstream ended unexpectedly")]
    TruncatedStream,

    #[error("malformed bitstream: {0}")]
    MalformedStream(String),

    #[error("bad container: {0}")]
    BadContainer(String),

    #[error("bad predictor table: {0}")]
    BadTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
