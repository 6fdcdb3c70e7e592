//! The client-side driver: performs the handshake, keeps tick requests in
//! flight, assembles sensor frames into bundles, preprocesses, enhances,
//! and hands finished frames to a sink callback.
//!
//! Synchronized mode drives simulation time with a bounded request window
//! (the engine never advances unless asked). Free-running mode consumes
//! whatever the engine produces and always enhances the newest complete
//! frame, dropping stale ones.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use g2r_core::{EnhancerInput, FrameBundle, ImagePlane};
use g2r_enhance::Enhancer;
use g2r_wire::{Hello, Message, MessageSink, MessageSource, SensorSelect, ServiceMode};

use crate::assemble::{BundleAssembler, RequiredSet};
use crate::error::PipelineError;
use crate::preprocess::Preprocessor;
use crate::stats::PipelineStats;

/// Stream geometry the engine advertises during the handshake.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamDescriptor {
    pub fixed_dt: f64,
    pub width: u32,
    pub height: u32,
}

/// One fully processed frame.
pub struct EnhancedFrame {
    pub frame_id: u64,
    pub enhanced: ImagePlane,
    /// The enhancer input that produced `enhanced`.
    pub input: EnhancerInput,
    /// The raw bundle, still at native resolution.
    pub bundle: FrameBundle,
}

/// Callback invoked per enhanced frame. An error aborts the run.
pub type FrameSink<'a> = dyn FnMut(EnhancedFrame) -> Result<(), String> + 'a;

/// Open the session: announce subscriptions and mode, wait for geometry.
pub fn handshake(
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    subscriptions: Vec<SensorSelect>,
    mode: ServiceMode,
) -> Result<StreamDescriptor, PipelineError> {
    tx.send(&Message::Hello(Hello::Subscribe {
        subscriptions,
        mode,
    }))?;
    match rx.recv() {
        Ok(Message::Hello(Hello::StreamInfo {
            fixed_dt,
            width,
            height,
        })) => Ok(StreamDescriptor {
            fixed_dt,
            width,
            height,
        }),
        Ok(other) => Err(PipelineError::Handshake(format!(
            "expected stream info, got {}",
            kind_name(&other)
        ))),
        Err(err) if err.is_disconnect() => Err(PipelineError::Handshake(
            "engine closed during handshake".into(),
        )),
        Err(err) => Err(err.into()),
    }
}

fn kind_name(msg: &Message) -> &'static str {
    match msg {
        Message::Hello(_) => "hello",
        Message::TickRequest { .. } => "tick request",
        Message::TickAck { .. } => "tick ack",
        Message::Sensor(_) => "sensor data",
        Message::Control { .. } => "control",
        Message::Bye => "bye",
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SyncOptions {
    /// How many enhanced frames to produce.
    pub ticks: u64,
    /// Tick requests kept in flight; the engine renders ahead while the
    /// client enhances. Must be at least 1.
    pub pipeline_depth: usize,
    /// World ticks advanced per request. Stride n enhances every n-th
    /// simulation step; the skipped steps still run, they just render
    /// nothing. Must be at least 1.
    pub tick_stride: u64,
}

impl Default for SyncOptions {
    fn default() -> Self {
        SyncOptions {
            ticks: 100,
            pipeline_depth: 1,
            tick_stride: 1,
        }
    }
}

/// Process one completed bundle through both stages and the sink.
fn enhance_bundle(
    bundle: FrameBundle,
    preprocessor: &Preprocessor,
    enhancer: &mut dyn Enhancer,
    stats: &mut PipelineStats,
    on_frame: &mut FrameSink,
) -> Result<(), PipelineError> {
    let (input, timings) = preprocessor.prepare(&bundle)?;
    stats.add_timings(&timings);

    let start = Instant::now();
    let enhanced = enhancer.enhance(&input)?;
    stats.enhance_ns += start.elapsed().as_nanos() as u64;

    let frame = EnhancedFrame {
        frame_id: bundle.frame_id,
        enhanced,
        input,
        bundle,
    };
    on_frame(frame).map_err(PipelineError::Sink)?;
    stats.frames_enhanced += 1;
    Ok(())
}

/// Drive the engine in synchronized mode. Call after `handshake` with
/// `ServiceMode::Sync`.
pub fn run_sync(
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    required: &RequiredSet,
    preprocessor: &Preprocessor,
    enhancer: &mut dyn Enhancer,
    options: &SyncOptions,
    on_frame: &mut FrameSink,
) -> Result<PipelineStats, PipelineError> {
    if options.pipeline_depth == 0 {
        return Err(PipelineError::ZeroDepth);
    }
    if options.tick_stride == 0 {
        return Err(PipelineError::ZeroStride);
    }

    let mut stats = PipelineStats {
        mode: "sync",
        ticks_requested: options.ticks,
        tick_stride: options.tick_stride,
        ..PipelineStats::default()
    };
    let mut assembler = BundleAssembler::new(required.clone());
    let started = Instant::now();

    // Requested frame ids are i * stride for i in 1..=ticks.
    let mut next_request: u64 = 1;
    let mut outstanding: BTreeSet<u64> = BTreeSet::new();
    let mut acks_seen: u64 = 0;
    let mut latest_seen: u64 = 0;

    let burst = (options.pipeline_depth as u64).min(options.ticks);
    for _ in 0..burst {
        let frame_id = next_request * options.tick_stride;
        tx.send(&Message::TickRequest { frame_id })?;
        outstanding.insert(frame_id);
        next_request += 1;
    }

    while acks_seen < options.ticks {
        let msg = match rx.recv() {
            Ok(msg) => msg,
            Err(err) if err.is_disconnect() => return Err(PipelineError::EngineClosed),
            Err(err) => return Err(err.into()),
        };
        match msg {
            Message::Sensor(frame) => {
                latest_seen = latest_seen.max(frame.frame_id);
                if let Some(bundle) = assembler.offer(frame)? {
                    stats.frames_assembled += 1;
                    stats.record_staleness((latest_seen - bundle.frame_id) / options.tick_stride);
                    enhance_bundle(bundle, preprocessor, enhancer, &mut stats, on_frame)?;
                }
            }
            Message::TickAck { frame_id } => {
                if !outstanding.remove(&frame_id) {
                    return Err(PipelineError::StrayAck { got: frame_id });
                }
                acks_seen += 1;
                if next_request <= options.ticks {
                    let id = next_request * options.tick_stride;
                    tx.send(&Message::TickRequest { frame_id: id })?;
                    outstanding.insert(id);
                    next_request += 1;
                }
            }
            Message::Bye => return Err(PipelineError::EngineClosed),
            other => {
                return Err(PipelineError::UnexpectedMessage {
                    kind: kind_name(&other),
                    phase: "synchronized run",
                })
            }
        }
    }

    // Reordering can slip the final ack ahead of that tick's last sensor
    // frames; drain whatever is still buffered so no bundle is stranded.
    while let Some(msg) = rx.try_recv()? {
        if let Message::Sensor(frame) = msg {
            latest_seen = latest_seen.max(frame.frame_id);
            if let Some(bundle) = assembler.offer(frame)? {
                stats.frames_assembled += 1;
                stats.record_staleness((latest_seen - bundle.frame_id) / options.tick_stride);
                enhance_bundle(bundle, preprocessor, enhancer, &mut stats, on_frame)?;
            }
        }
    }

    tx.send(&Message::Bye)?;

    let asm = assembler.stats();
    stats.late_discarded = asm.late_discarded;
    stats.incomplete_evicted = asm.incomplete_evicted;
    stats.finalize(started.elapsed(), options.ticks * options.tick_stride);
    Ok(stats)
}

#[derive(Debug, Clone, Copy)]
pub struct AsyncOptions {
    /// Stop after this many enhanced frames.
    pub frames: u64,
    /// Completed bundles held for enhancement. When full the oldest is
    /// dropped, so capacity 1 means the freshest frame always wins. Must
    /// be at least 1.
    pub queue_capacity: usize,
    /// How long one wait for engine output may block before re-checking.
    pub poll: Duration,
}

impl Default for AsyncOptions {
    fn default() -> Self {
        AsyncOptions {
            frames: 100,
            queue_capacity: 1,
            poll: Duration::from_millis(2),
        }
    }
}

/// Consume a free-running engine. Call after `handshake` with
/// `ServiceMode::Async`.
pub fn run_async(
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    required: &RequiredSet,
    preprocessor: &Preprocessor,
    enhancer: &mut dyn Enhancer,
    options: &AsyncOptions,
    on_frame: &mut FrameSink,
) -> Result<PipelineStats, PipelineError> {
    if options.queue_capacity == 0 {
        return Err(PipelineError::ZeroDepth);
    }

    let mut stats = PipelineStats {
        mode: "async",
        ticks_requested: options.frames,
        tick_stride: 1,
        ..PipelineStats::default()
    };
    let mut assembler = BundleAssembler::new(required.clone());
    let started = Instant::now();

    let mut ready: std::collections::VecDeque<FrameBundle> = std::collections::VecDeque::new();
    let mut latest_seen: u64 = 0;

    let handle = |msg: Message,
                      assembler: &mut BundleAssembler,
                      ready: &mut std::collections::VecDeque<FrameBundle>,
                      latest_seen: &mut u64,
                      stats: &mut PipelineStats|
     -> Result<(), PipelineError> {
        match msg {
            Message::Sensor(frame) => {
                *latest_seen = (*latest_seen).max(frame.frame_id);
                if let Some(bundle) = assembler.offer(frame)? {
                    stats.frames_assembled += 1;
                    if ready.len() == options.queue_capacity {
                        ready.pop_front();
                        stats.dropped_oldest += 1;
                    }
                    ready.push_back(bundle);
                }
                Ok(())
            }
            Message::Bye => Err(PipelineError::EngineClosed),
            other => Err(PipelineError::UnexpectedMessage {
                kind: kind_name(&other),
                phase: "free-running run",
            }),
        }
    };

    while stats.frames_enhanced < options.frames {
        // Take everything already queued; newest-wins happens here.
        while let Some(msg) = rx.try_recv()? {
            handle(msg, &mut assembler, &mut ready, &mut latest_seen, &mut stats)?;
        }
        match ready.pop_front() {
            Some(bundle) => {
                stats.record_staleness(latest_seen - bundle.frame_id);
                enhance_bundle(bundle, preprocessor, enhancer, &mut stats, on_frame)?;
            }
            None => {
                if let Some(msg) = rx.recv_timeout(options.poll)? {
                    handle(msg, &mut assembler, &mut ready, &mut latest_seen, &mut stats)?;
                }
            }
        }
    }

    tx.send(&Message::Bye)?;
    // The engine may still be mid-send; swallow its tail until it hangs up.
    loop {
        match rx.recv() {
            Ok(_) => continue,
            Err(err) if err.is_disconnect() => break,
            Err(err) => return Err(err.into()),
        }
    }

    let asm = assembler.stats();
    stats.late_discarded = asm.late_discarded;
    stats.incomplete_evicted = asm.incomplete_evicted;
    stats.finalize(started.elapsed(), latest_seen);
    Ok(stats)
}
