use g2r_core::CoreError;
use g2r_enhance::EnhanceError;
use g2r_wire::WireError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Wire(#[from] WireError),

    #[error(transparent)]
    Enhance(#[from] EnhanceError),

    #[error("handshake failed: {0}")]
    Handshake(String),

    #[error("engine closed the stream mid-run")]
    EngineClosed,

    #[error("unexpected {kind} message during {phase}")]
    UnexpectedMessage {
        kind: &'static str,
        phase: &'static str,
    },

    #[error("sensor frame {frame_id} carries channel {channel} the pipeline never subscribes")]
    UnsubscribedChannel { frame_id: u64, channel: String },

    #[error("tick ack for frame {got} does not match any outstanding request")]
    StrayAck { got: u64 },

    #[error("pipeline depth must be at least 1")]
    ZeroDepth,

    #[error("tick stride must be at least 1")]
    ZeroStride,

    #[error("sink callback failed: {0}")]
    Sink(String),
}
