//! Client-side real-time pipeline: receives sensor streams from an engine,
//! reassembles them into per-tick bundles keyed by frame id, preprocesses
//! them into enhancer inputs, runs the enhancer, and reports throughput
//! and staleness statistics.
//!
//! The pipeline is transport-agnostic; it drives any
//! [`g2r_wire::MessageSink`]/[`g2r_wire::MessageSource`] pair, whether
//! in-process or TCP.

pub mod assemble;
pub mod client;
pub mod error;
pub mod jitter;
pub mod preprocess;
pub mod stats;

pub use assemble::{AssemblerStats, BundleAssembler, RequiredSet, CORE_GBUFFERS};
pub use client::{
    handshake, run_async, run_sync, AsyncOptions, EnhancedFrame, FrameSink, StreamDescriptor,
    SyncOptions,
};
pub use error::PipelineError;
pub use g2r_wire::{MessageSink, MessageSource, SensorSelect, ServiceMode};
pub use jitter::JitterSource;
pub use preprocess::{LaneTimings, Preprocessor};
pub use stats::PipelineStats;
