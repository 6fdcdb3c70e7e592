use g2r_core::CoreError;
use g2r_wire::WireError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnhanceError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Wire(#[from] WireError),

    #[error("plane has {got} channels, enhancer needs {expected}")]
    WrongChannelCount { expected: u8, got: u8 },

    #[error("int8 emulation requested without calibration parameters")]
    NotCalibrated,

    #[error("calibration saw no frames")]
    EmptyCalibration,

    #[error("reference profile covers {got} groups, the grouping has {expected}")]
    ReferenceGroupCount { expected: usize, got: usize },

    #[error("external enhancer missed its {waited_ms} ms deadline")]
    ExternalTimeout { waited_ms: u64 },

    #[error("external enhancer protocol violation: {0}")]
    ExternalProtocol(String),
}
