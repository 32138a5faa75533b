//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },

    #[error("pixel buffer length {got} does not match {width}x{height} with {channels} channel(s)")]
    BufferSize {
        width: u32,
        height: u32,
        channels: u32,
        got: usize,
    },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },

    #[error("point ({x}, {y}) out of bounds for {width}x{height} image")]
    OutOfBounds { x: i64, y: i64, width: u32, height: u32 },

    #[error("patch of radius {radius} at ({x}, {y}) exceeds {width}x{height} image")]
    PatchOutOfBounds {
        x: i64,
        y: i64,
        radius: u32,
        width: u32,
        height: u32,
    },

    #[error("image {width}x{height} too small for detection, need at least {min_side}x{min_side}")]
    ImageTooSmall { width: u32, height: u32, min_side: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("k = {k} exceeds train descriptor count {train_len}")]
    KnnTooLarge { k: usize, train_len: usize },

    #[error("ratio filter requires 2-nearest-neighbor pairs for every query")]
    MissingKnnPairs,

    #[error("correct count {correct} exceeds total {total}")]
    CountExceedsTotal { correct: usize, total: usize },

    #[error("match references index {index} beyond keypoint list of length {len}")]
    MatchIndexOutOfRange { index: usize, len: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
