//! Error type shared by every stage of the pipeline.

use std::io;

/// Errors raised by feature extraction, file handling and scoring.
#[derive(Debug, thiserror::Error)]
pub enum SalsaError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed container or file header.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed input that uses an encoding or mode this crate does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A value outside its documented domain (angles, class indices, probabilities).
    #[error("range error: {0}")]
    Range(String),

    /// Inconsistent configuration or violated precondition on shapes/rates.
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// No single-source bins were available to estimate a direction.
    #[error("no estimate: {0}")]
    NoEstimate(String),
}

pub type Result<T> = std::result::Result<T, SalsaError>;
