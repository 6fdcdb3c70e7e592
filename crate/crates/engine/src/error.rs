//! Engine and scenario errors.

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("handshake failed: {0}")]
    BadHandshake(String),

    #[error("tick {requested} requested but the world is already at {current}")]
    NonMonotonicTick { current: u64, requested: u64 },

    #[error("protocol: {0}")]
    Wire(#[from] g2r_wire::WireError),

    #[error("render: {0}")]
    Core(#[from] g2r_core::CoreError),

    #[error("service thread panicked")]
    ServicePanicked,

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
