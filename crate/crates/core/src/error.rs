use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::BBox;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("box corners out of order: {0:?}")]
    BoxOrder(BBox),
    #[error("box has non-finite coordinate: {0:?}")]
    NonFinite(BBox),
    #[error("box has negative coordinate: {0:?}")]
    Negative(BBox),
}

/// A syntax or schema failure in serialized text, located by byte offset.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{code} at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub code: &'static str,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            offset,
            code,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SerializationError {
    #[error("extent must be positive and finite, got {0}")]
    Extent(f64),
    #[error("coordinate must be finite, got {0}")]
    Coordinate(f64),
    #[error("record {image_id:?} is not serializable: {reason}")]
    InvalidRecord { image_id: String, reason: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("input is not valid UTF-8 text")]
    NotText,
}

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("IoU threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
    #[error("duplicate image_id {image_id:?} in {stream} stream")]
    DuplicateImage {
        image_id: String,
        stream: &'static str,
    },
    #[error("ground-truth record {0:?} has no target_category (required in object mode)")]
    MissingTargetCategory(String),
    #[error("threshold list is empty")]
    NoThresholds,
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("{pool} pool is empty but stage {stage} needs {needed} entries from it")]
    EmptyPool {
        pool: &'static str,
        stage: u8,
        needed: usize,
    },
    #[error("invalid stage: {0}")]
    Stage(String),
}
