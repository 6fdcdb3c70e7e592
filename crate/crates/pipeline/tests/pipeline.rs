//! Pipeline tests: bundle assembly under reorder and loss, preprocessing
//! re-derivation against the core primitives, and full driver runs over an
//! in-process engine in both service modes.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use g2r_core::{
    resize_bilinear, ClassGrouping, GBufferId, ImagePlane, Precision, GROUP_COUNT,
};
use g2r_engine::{start_in_process, ServiceOptions, WorldConfig};
use g2r_enhance::IdentityEnhancer;
use g2r_pipeline::{
    handshake, run_async, run_sync, AsyncOptions, BundleAssembler, JitterSource, PipelineError,
    Preprocessor, RequiredSet, SyncOptions, CORE_GBUFFERS,
};
use g2r_wire::{
    in_process_pair, Message, MessageSink, MessageSource, SensorChannel, SensorFrame,
    SensorSelect, ServiceMode,
};

fn plane(w: u32, h: u32, channels: u8, fill: f32) -> ImagePlane {
    ImagePlane::splat(w, h, channels, Precision::F32, fill).unwrap()
}

fn stencil_plane(w: u32, h: u32) -> ImagePlane {
    let data: Vec<f32> = (0..(w * h) as usize)
        .map(|p| (p % 29) as f32 / 255.0)
        .collect();
    ImagePlane::new(w, h, 1, Precision::F32, data).unwrap()
}

/// Every frame of one complete tick, in the order the engine sends them.
fn tick_frames(frame_id: u64, w: u32, h: u32) -> Vec<SensorFrame> {
    let mut frames = vec![SensorFrame::from_image_plane(
        frame_id,
        SensorChannel::Rgb,
        &plane(w, h, 3, frame_id as f32 * 0.01),
    )];
    for id in CORE_GBUFFERS {
        frames.push(SensorFrame::from_image_plane(
            frame_id,
            SensorChannel::GBuffer(id),
            &plane(w, h, id.channels(), 0.5),
        ));
    }
    frames.push(SensorFrame::from_image_plane(
        frame_id,
        SensorChannel::GBuffer(GBufferId::CustomStencil),
        &stencil_plane(w, h),
    ));
    frames
}

#[test]
fn assembler_completes_a_tick_and_joins_all_channels() {
    let mut asm = BundleAssembler::new(RequiredSet::standard());
    let frames = tick_frames(1, 8, 6);
    let last = frames.len() - 1;
    for (i, frame) in frames.into_iter().enumerate() {
        let out = asm.offer(frame).unwrap();
        if i < last {
            assert!(out.is_none(), "bundle completed early at frame {i}");
        } else {
            let bundle = out.expect("bundle completes on the final frame");
            assert_eq!(bundle.frame_id, 1);
            assert_eq!(bundle.rgb.width(), 8);
            assert_eq!(bundle.semantics.class_at(3, 2), (2 * 8 + 3) % 29);
            for id in CORE_GBUFFERS {
                assert!(bundle.gbuffers.get(id).is_some(), "missing {id:?}");
            }
            // The raw stencil rides along in the buffer set too.
            assert!(bundle.gbuffers.get(GBufferId::CustomStencil).is_some());
        }
    }
    assert_eq!(asm.stats().bundles_emitted, 1);
}

#[test]
fn assembler_tolerates_any_order_within_a_tick() {
    let mut in_order = BundleAssembler::new(RequiredSet::standard());
    let mut reversed = BundleAssembler::new(RequiredSet::standard());

    let mut expected = None;
    for frame in tick_frames(1, 8, 6) {
        expected = expected.or(in_order.offer(frame).unwrap());
    }
    let mut got = None;
    for frame in tick_frames(1, 8, 6).into_iter().rev() {
        got = got.or(reversed.offer(frame).unwrap());
    }

    let expected = expected.unwrap();
    let got = got.unwrap();
    assert_eq!(got.rgb.data(), expected.rgb.data());
    assert_eq!(got.semantics.classes(), expected.semantics.classes());
}

#[test]
fn assembler_discards_frames_behind_the_watermark() {
    let mut asm = BundleAssembler::new(RequiredSet::standard());
    for frame in tick_frames(2, 8, 6) {
        asm.offer(frame).unwrap();
    }
    assert_eq!(asm.stats().bundles_emitted, 1);

    let stale = tick_frames(1, 8, 6).remove(0);
    assert!(asm.offer(stale).unwrap().is_none());
    assert_eq!(asm.stats().late_discarded, 1);
    assert_eq!(asm.pending_len(), 0);
}

#[test]
fn assembler_evicts_stranded_ticks_when_a_newer_one_completes() {
    let mut asm = BundleAssembler::new(RequiredSet::standard());
    // Tick 1 never finishes: only its color frame arrives.
    let rgb_1 = tick_frames(1, 8, 6).remove(0);
    assert!(asm.offer(rgb_1).unwrap().is_none());

    let mut done = None;
    for frame in tick_frames(2, 8, 6) {
        done = done.or(asm.offer(frame).unwrap());
    }
    assert_eq!(done.unwrap().frame_id, 2);
    assert_eq!(asm.stats().incomplete_evicted, 1);

    // Tick 1 stragglers are now behind the watermark.
    let stencil_1 = tick_frames(1, 8, 6).pop().unwrap();
    assert!(asm.offer(stencil_1).unwrap().is_none());
    assert_eq!(asm.stats().late_discarded, 1);
}

#[test]
fn assembler_rejects_channels_never_subscribed() {
    let mut asm = BundleAssembler::new(RequiredSet::standard());
    let onehot = g2r_core::group_semantic_map(
        &g2r_core::stencil_to_semantic(&stencil_plane(8, 6)).unwrap(),
        &ClassGrouping::standard(),
    )
    .unwrap();
    let err = asm
        .offer(SensorFrame::from_onehot(1, &onehot))
        .unwrap_err();
    assert!(matches!(
        err,
        PipelineError::UnsubscribedChannel { frame_id: 1, .. }
    ));
}

#[test]
fn required_set_round_trips_through_subscriptions() {
    let standard = RequiredSet::standard();
    let subs = standard.subscriptions();
    assert_eq!(
        subs,
        vec![
            SensorSelect::Rgb,
            SensorSelect::GBuffers,
            SensorSelect::Stencil
        ]
    );
    assert_eq!(RequiredSet::from_subscriptions(&subs, false), standard);

    let full = RequiredSet {
        lidar: true,
        vehicle: true,
        actor_ids: true,
        ..RequiredSet::standard()
    };
    let subs = full.subscriptions();
    assert_eq!(RequiredSet::from_subscriptions(&subs, false), full);

    let exotic = RequiredSet::from_subscriptions(&[SensorSelect::GBuffers], true);
    assert!(exotic.gbuffers.contains(&GBufferId::Velocity));
    assert!(!exotic.rgb);
}

/// Drive one tick by hand and return its assembled bundle.
fn pump_bundle(
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    asm: &mut BundleAssembler,
    frame_id: u64,
) -> g2r_core::FrameBundle {
    tx.send(&Message::TickRequest { frame_id }).unwrap();
    let mut out = None;
    loop {
        match rx.recv().unwrap() {
            Message::Sensor(frame) => {
                if let Some(bundle) = asm.offer(frame).unwrap() {
                    out = Some(bundle);
                }
            }
            Message::TickAck { frame_id: acked } => {
                assert_eq!(acked, frame_id);
                break;
            }
            other => panic!("unexpected message {other:?}"),
        }
    }
    out.expect("tick completes a bundle")
}

fn engine_config(seed: u64) -> WorldConfig {
    WorldConfig {
        seed,
        width: 96,
        height: 54,
        ..WorldConfig::default()
    }
}

#[test]
fn prepare_produces_model_resolution_input() {
    let (mut tx, mut rx, handle) =
        start_in_process(engine_config(3), ServiceOptions::default());
    let required = RequiredSet::standard();
    let info = handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();
    assert_eq!((info.width, info.height), (96, 54));

    let mut asm = BundleAssembler::new(required);
    let bundle = pump_bundle(&mut *tx, &mut *rx, &mut asm, 1);
    tx.send(&Message::Bye).unwrap();
    handle.join().unwrap();

    let pre = Preprocessor::new(ClassGrouping::standard(), 64, 36);
    let (input, _timings) = pre.prepare(&bundle).unwrap();

    assert_eq!(input.frame_id, 1);
    assert_eq!((input.rgb.width(), input.rgb.height()), (64, 36));
    assert_eq!(input.rgb.channels(), 3);
    assert_eq!((input.onehot.width(), input.onehot.height()), (64, 36));
    // Partition invariant: group_at resolves for every pixel.
    for p in 0..(64 * 36) {
        assert!(input.onehot.group_at(p) < GROUP_COUNT);
    }
    g2r_core::validate_streams(&input.streams, pre.grouping()).unwrap();
}

#[test]
fn stream_stacks_rederive_from_resized_buffers() {
    let (mut tx, mut rx, handle) =
        start_in_process(engine_config(11), ServiceOptions::default());
    let required = RequiredSet::standard();
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();
    let mut asm = BundleAssembler::new(required);
    // A few ticks in so traffic has moved off its spawn grid.
    let bundle = pump_bundle(&mut *tx, &mut *rx, &mut asm, 4);
    tx.send(&Message::Bye).unwrap();
    handle.join().unwrap();

    let (tw, th) = (64u32, 36u32);
    let n = (tw * th) as usize;
    let grouping = ClassGrouping::standard();
    let pre = Preprocessor::new(ClassGrouping::standard(), tw, th);
    let (input, _) = pre.prepare(&bundle).unwrap();

    let resized: BTreeMap<GBufferId, ImagePlane> = bundle
        .gbuffers
        .iter()
        .filter(|(id, _)| {
            *id != GBufferId::CustomStencil && !GBufferId::EXCLUDED_FROM_POLICIES.contains(id)
        })
        .map(|(id, p)| (id, resize_bilinear(p, tw, th).unwrap()))
        .collect();

    for group in 0..GROUP_COUNT as u8 {
        let policy = grouping.policy(group);
        if policy.is_empty() {
            assert!(!input.streams.contains_key(&group));
            continue;
        }
        let stack = &input.streams[&group];
        let total: usize = policy.iter().map(|b| b.channels() as usize).sum();
        assert_eq!(stack.channels() as usize, total, "group {group}");

        let mask = input.onehot.plane(group);
        let mut base = 0usize;
        for &id in policy {
            let src = &resized[&id];
            let ch = id.channels() as usize;
            for c in 0..ch {
                for p in 0..n {
                    let expected = if mask[p] == 1 {
                        src.data()[p * ch + c]
                    } else {
                        0.0
                    };
                    assert_eq!(
                        stack.data()[(base + c) * n + p],
                        expected,
                        "group {group} buffer {id:?} channel {c} pixel {p}"
                    );
                }
            }
            base += ch;
        }
    }
}

fn sync_engine(
    seed: u64,
) -> (
    Box<dyn MessageSink>,
    Box<dyn MessageSource>,
    g2r_engine::ServerHandle,
) {
    start_in_process(engine_config(seed), ServiceOptions::default())
}

#[test]
fn sync_run_enhances_every_tick_in_order() {
    let (mut tx, mut rx, handle) = sync_engine(5);
    let required = RequiredSet::standard();
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();

    let pre = Preprocessor::new(ClassGrouping::standard(), 96, 54);
    let mut enhancer = IdentityEnhancer;
    let mut ids = Vec::new();
    let stats = run_sync(
        &mut *tx,
        &mut *rx,
        &required,
        &pre,
        &mut enhancer,
        &SyncOptions {
            ticks: 6,
            pipeline_depth: 2,
            tick_stride: 1,
        },
        &mut |frame| {
            assert_eq!(frame.enhanced.data(), frame.input.rgb.data());
            ids.push(frame.frame_id);
            Ok(())
        },
    )
    .unwrap();
    handle.join().unwrap();

    assert_eq!(ids, vec![1, 2, 3, 4, 5, 6]);
    assert_eq!(stats.frames_enhanced, 6);
    assert_eq!(stats.frames_assembled, 6);
    assert_eq!(stats.late_discarded, 0);
    assert_eq!(stats.incomplete_evicted, 0);
    assert_eq!(stats.mode, "sync");
}

#[test]
fn sync_run_with_stride_requests_sparse_frames() {
    let (mut tx, mut rx, handle) = sync_engine(6);
    let required = RequiredSet::standard();
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();

    let pre = Preprocessor::new(ClassGrouping::standard(), 96, 54);
    let mut ids = Vec::new();
    let stats = run_sync(
        &mut *tx,
        &mut *rx,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &SyncOptions {
            ticks: 4,
            pipeline_depth: 2,
            tick_stride: 3,
        },
        &mut |frame| {
            ids.push(frame.frame_id);
            Ok(())
        },
    )
    .unwrap();
    handle.join().unwrap();

    assert_eq!(ids, vec![3, 6, 9, 12]);
    assert_eq!(stats.frames_enhanced, 4);
    assert_eq!(stats.tick_stride, 3);
}

#[test]
fn sync_run_survives_bounded_reorder() {
    let (mut tx, rx, handle) = sync_engine(7);
    let required = RequiredSet::standard();
    let mut rx = rx;
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();
    // Reorder only after the handshake; displacement 3 stays below the
    // 11 frames each tick carries, so nothing can be lost.
    let mut jittered = JitterSource::new(rx, 3, 42);

    let pre = Preprocessor::new(ClassGrouping::standard(), 96, 54);
    let mut ids = Vec::new();
    let stats = run_sync(
        &mut *tx,
        &mut jittered,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &SyncOptions {
            ticks: 40,
            pipeline_depth: 4,
            tick_stride: 1,
        },
        &mut |frame| {
            ids.push(frame.frame_id);
            Ok(())
        },
    )
    .unwrap();
    handle.join().unwrap();

    assert_eq!(ids, (1..=40).collect::<Vec<u64>>());
    assert_eq!(stats.frames_enhanced, 40);
    assert_eq!(stats.late_discarded, 0);
    assert_eq!(stats.incomplete_evicted, 0);
}

#[test]
fn sync_run_rejects_degenerate_options() {
    let ((mut tx, mut rx), _peer) = in_process_pair(4);
    let pre = Preprocessor::new(ClassGrouping::standard(), 8, 6);
    let required = RequiredSet::standard();

    let err = run_sync(
        &mut tx,
        &mut rx,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &SyncOptions {
            ticks: 1,
            pipeline_depth: 0,
            tick_stride: 1,
        },
        &mut |_| Ok(()),
    )
    .unwrap_err();
    assert!(matches!(err, PipelineError::ZeroDepth));

    let err = run_sync(
        &mut tx,
        &mut rx,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &SyncOptions {
            ticks: 1,
            pipeline_depth: 1,
            tick_stride: 0,
        },
        &mut |_| Ok(()),
    )
    .unwrap_err();
    assert!(matches!(err, PipelineError::ZeroStride));
}

#[test]
fn sink_errors_abort_the_run() {
    let (mut tx, mut rx, handle) = sync_engine(8);
    let required = RequiredSet::standard();
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .unwrap();

    let pre = Preprocessor::new(ClassGrouping::standard(), 96, 54);
    let err = run_sync(
        &mut *tx,
        &mut *rx,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &SyncOptions {
            ticks: 5,
            pipeline_depth: 1,
            tick_stride: 1,
        },
        &mut |frame| {
            if frame.frame_id == 2 {
                Err("disk full".into())
            } else {
                Ok(())
            }
        },
    )
    .unwrap_err();
    assert!(matches!(err, PipelineError::Sink(ref s) if s == "disk full"));

    // The engine side is still healthy; shut it down cleanly.
    tx.send(&Message::Bye).unwrap();
    handle.join().unwrap();
}

#[test]
fn async_run_consumes_a_free_running_engine() {
    let opts = ServiceOptions {
        async_interval: Some(Duration::from_micros(200)),
        ..ServiceOptions::default()
    };
    let (mut tx, mut rx, handle) = start_in_process(engine_config(9), opts);
    let required = RequiredSet::standard();
    handshake(
        &mut *tx,
        &mut *rx,
        required.subscriptions(),
        ServiceMode::Async,
    )
    .unwrap();

    let pre = Preprocessor::new(ClassGrouping::standard(), 96, 54);
    let mut ids = Vec::new();
    let stats = run_async(
        &mut *tx,
        &mut *rx,
        &required,
        &pre,
        &mut IdentityEnhancer,
        &AsyncOptions {
            frames: 5,
            ..AsyncOptions::default()
        },
        &mut |frame| {
            ids.push(frame.frame_id);
            Ok(())
        },
    )
    .unwrap();
    handle.join().unwrap();

    assert_eq!(stats.frames_enhanced, 5);
    assert_eq!(ids.len(), 5);
    assert!(ids.windows(2).all(|w| w[0] < w[1]), "ids not fresh: {ids:?}");
    assert_eq!(
        stats.staleness_buckets.iter().sum::<u64>(),
        5,
        "every enhanced frame records staleness"
    );
    assert_eq!(stats.mode, "async");
}

#[test]
fn handshake_rejects_a_wrong_reply() {
    let ((mut client_tx, mut client_rx), (mut server_tx, mut server_rx)) = in_process_pair(8);
    let server = thread::spawn(move || {
        let msg = server_rx.recv().unwrap();
        assert!(matches!(msg, Message::Hello(_)));
        server_tx.send(&Message::TickAck { frame_id: 0 }).unwrap();
    });

    let err = handshake(
        &mut client_tx,
        &mut client_rx,
        vec![SensorSelect::Rgb],
        ServiceMode::Sync,
    )
    .unwrap_err();
    assert!(matches!(err, PipelineError::Handshake(_)));
    server.join().unwrap();
}

#[test]
fn jitter_source_preserves_messages_and_bounds_displacement() {
    let ((mut tx, _unused_rx), (_unused_tx, rx)) = in_process_pair(256);
    for i in 0..100u64 {
        tx.send(&Message::TickRequest { frame_id: i }).unwrap();
    }
    drop(tx);

    let mut jittered = JitterSource::new(Box::new(rx), 3, 7);
    let mut got = Vec::new();
    loop {
        match jittered.recv() {
            Ok(Message::TickRequest { frame_id }) => got.push(frame_id),
            Ok(other) => panic!("unexpected {other:?}"),
            Err(err) => {
                assert!(err.is_disconnect());
                break;
            }
        }
    }

    let mut sorted = got.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..100).collect::<Vec<u64>>(), "messages lost");
    let displaced = got
        .iter()
        .enumerate()
        .map(|(pos, &id)| (pos as i64 - id as i64).unsigned_abs())
        .max()
        .unwrap();
    assert!(displaced <= 3, "displacement {displaced} exceeds window");
    assert!(got != (0..100).collect::<Vec<u64>>(), "shuffle did nothing");
}
