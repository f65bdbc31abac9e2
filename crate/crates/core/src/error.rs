use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {what} ({left_w}x{left_h} vs {right_w}x{right_h})")]
    DimensionMismatch {
        what: &'static str,
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid label {label} at pixel {index}")]
    InvalidLabel { label: u8, index: usize },

    /// Malformed binary payload; `offset` is the byte position of the problem.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("empty cycle domain")]
    EmptyCycleDomain,

    #[error("naive correlation refused: {pixels} pixels exceeds cap {cap} ({entries} entries)")]
    CapExceeded {
        pixels: usize,
        cap: usize,
        entries: u128,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    /// A broken internal consistency check.
    #[error("internal error: {0}")]
    Internal(String),

    /// Wraps an error with the pipeline stage (or file) it came from.
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the failure was caused by the caller's input rather than a
    /// bug or environment problem.
    pub fn is_invalid_input(&self) -> bool {
        match self.root() {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidLabel { .. }
            | Error::Format { .. }
            | Error::Image { .. }
            | Error::EmptyCycleDomain
            | Error::CapExceeded { .. } => true,
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData
            ),
            Error::Internal(_) => false,
            Error::Context { .. } => unreachable!(),
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.context(context))
    }
}
