use std::path::PathBuf;

/// Errors raised by the geometry, warping, loss and I/O routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {what} is {actual:?}, expected {expected:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate orbit pose: elevation {0} deg leaves the up-vector parallel to the view axis")]
    DegenerateOrbit(f64),

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    WindowTooLarge { width: usize, height: usize, window: usize },

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("malformed {format} data at byte {offset}: {reason}")]
    Parse {
        format: &'static str,
        offset: usize,
        reason: String,
    },

    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error for {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("invalid JSON config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("invalid JSON config {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True when the error was caused by the caller's data rather than by a
    /// failure of the environment (e.g. a write that could not complete).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Write { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(what: &'static str, expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, actual })
    }
}
