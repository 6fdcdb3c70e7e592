//! Protocol errors. Decoding never panics and never allocates more than the
//! declared payload bound, whatever bytes arrive.

use g2r_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("header needs {expected} bytes, only {got} available")]
    TruncatedHeader { expected: usize, got: usize },

    #[error("bad magic {0:02x?}, expected \"G2RL\"")]
    BadMagic([u8; 4]),

    #[error("protocol version {0} unsupported, this build speaks 1")]
    UnsupportedVersion(u16),

    #[error("reserved header byte holds {0}, must be 0")]
    ReservedByteSet(u8),

    #[error("unknown message kind {0}")]
    UnknownKind(u8),

    #[error("unknown sensor channel {0}")]
    UnknownSensor(u8),

    #[error("unknown buffer code {0}")]
    UnknownBuffer(u8),

    #[error("unknown precision code {0}")]
    UnknownPrecision(u8),

    #[error("stream group {0} out of range")]
    BadStreamGroup(u8),

    #[error("declared payload of {len} bytes exceeds the {max} byte bound")]
    PayloadTooLarge { len: u32, max: u32 },

    #[error("payload of {actual} bytes does not match geometry, expected {expected}")]
    LengthMismatch { expected: u64, actual: u32 },

    #[error("payload truncated: declared {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },

    #[error("{kind} carries a malformed payload: {detail}")]
    MalformedPayload { kind: &'static str, detail: String },

    #[error("sensor frame is {actual:?}, expected {expected:?}")]
    UnexpectedChannel {
        expected: crate::header::SensorChannel,
        actual: crate::header::SensorChannel,
    },

    #[error("decoded samples rejected: {0}")]
    Sample(#[from] CoreError),

    #[error("peer closed the connection")]
    Disconnected,

    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
}

impl WireError {
    /// True when the stream ended cleanly between messages rather than
    /// mid-frame.
    pub fn is_disconnect(&self) -> bool {
        match self {
            WireError::Disconnected => true,
            WireError::Io(e) => matches!(
                e.kind(),
                std::io::ErrorKind::UnexpectedEof
                    | std::io::ErrorKind::ConnectionReset
                    | std::io::ErrorKind::BrokenPipe
            ),
            _ => false,
        }
    }
}
