use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the emulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frame dimensions {got_w}x{got_h} do not match expected {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },

    #[error("timestamps must be strictly increasing (got {next} after {prev})")]
    NonMonotoneTime { prev: f64, next: f64 },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("truncated event file: header declares {declared} events, payload holds {available}")]
    Truncated { declared: u64, available: u64 },

    #[error("malformed event record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("too few events ({0}) to estimate blur")]
    TooFewEvents(usize),

    #[error("failed to decode image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
