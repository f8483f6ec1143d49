//! Error type shared across the engine.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: failed to decode PNG: {reason}")]
    PngDecode { path: PathBuf, reason: String },

    #[error("{path}: failed to encode PNG: {reason}")]
    PngEncode { path: PathBuf, reason: String },

    #[error("{path}: unsupported PNG layout: {reason}")]
    UnsupportedPng { path: PathBuf, reason: String },

    #[error("image has zero dimension ({width}x{height})")]
    ZeroDimension { width: u32, height: u32 },

    #[error("value {value} at index {index} is outside [0,1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("buffer length {len} does not match {width}x{height}")]
    LengthMismatch { len: usize, width: u32, height: u32 },

    #[error("dimension mismatch: {expected_width}x{expected_height} vs {got_width}x{got_height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        got_width: u32,
        got_height: u32,
    },

    #[error("ground truth has no foreground pixel; precision/recall are undefined")]
    EmptyGroundTruth,

    #[error("mask has no foreground pixel")]
    EmptyMask,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("smoothing window must be odd and >= 1, got {0}")]
    BadSmoothWindow(usize),

    #[error("threshold t must lie in [0,1], got {0}")]
    ThresholdOutOfRange(f64),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
