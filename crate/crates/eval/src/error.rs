use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("semantic map shapes differ: predicted {pred_w}x{pred_h}, reference {gt_w}x{gt_h}")]
    MapShapeMismatch {
        pred_w: u32,
        pred_h: u32,
        gt_w: u32,
        gt_h: u32,
    },
    #[error("feature dimensions differ: {left} vs {right}")]
    FeatureDimMismatch { left: u32, right: u32 },
    #[error("feature set {set:?} has zero dimension")]
    ZeroDim { set: String },
    #[error("feature data length {len} is not a multiple of dimension {dim}")]
    RaggedData { len: usize, dim: u32 },
    #[error("feature set {set:?} row {index} contains a non-finite value")]
    NonFinite { set: String, index: usize },
    #[error("feature set {set:?} row {index} is a zero vector, cosine undefined")]
    ZeroVector { set: String, index: usize },
    #[error("feature set {set:?} is empty, pairwise mean undefined")]
    EmptySet { set: String },
    #[error("bad feature container: {0}")]
    BadContainer(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("benchmark matrix is empty")]
    EmptyMatrix,
    #[error("benchmark workload: {0}")]
    BadWorkload(String),
    #[error("{ticks} ticks leave no measured frames after warmup at skip {skip}")]
    ZeroWindow { ticks: u64, skip: u64 },
}

impl EvalError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.into(),
            source,
        }
    }
}
