use std::path::PathBuf;

use g2r_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("io failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),

    #[error("lidar scan is from frame {got}, boxes are for frame {expected}")]
    FrameIdMismatch { expected: u64, got: u64 },

    #[error("actor map has {got} entries, stencil has {expected} pixels")]
    ActorMapMismatch { expected: usize, got: usize },

    #[error("capture requests {product} but the frame does not carry it")]
    MissingProduct { product: &'static str },

    #[error(
        "enhanced frame is {got_w}x{got_h} but the source frame is \
         {expected_w}x{expected_h}; paired products must match"
    )]
    PairingMismatch {
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("capture cadence must be at least 1")]
    ZeroCadence,

    #[error("minimum box area must be at least 1")]
    ZeroBoxArea,

    #[error("packed container is malformed: {0}")]
    BadContainer(String),
}

impl DatagenError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatagenError::Io {
            path: path.into(),
            source,
        }
    }
}
