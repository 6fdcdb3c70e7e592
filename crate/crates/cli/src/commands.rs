//! Command implementations: each takes the validated config plus its own
//! flags, runs to completion, and prints results on stdout. Progress and
//! warnings go to stderr so stdout stays parseable.

use std::path::{Path, PathBuf};
use std::time::Duration;

use g2r_core::{resize_bilinear, ClassGrouping, ImagePlane, SemanticMap, CLASS_COUNT, CLASS_NAMES};
use g2r_datagen::{CaptureSession, WorldStatusRecord};
use g2r_enhance::{
    ColorStats, Enhancer, ExternalEnhancer, IdentityEnhancer, PrecisionEmulator, PrecisionMode,
    StatsAccumulator, StatsMatchEnhancer,
};
use g2r_engine::service::TickHook;
use g2r_engine::{start_in_process, Scenario, ScenarioRunner, ServiceOptions, WorldConfig};
use g2r_eval::{
    cosine_pairwise, cost_for_frame_ms, fps_benchmark, iou, load_features, save_features,
    BenchWorkload, CellOutcome, EvalError, FeatureSet,
};
use g2r_pipeline::{
    handshake, run_async, run_sync, AsyncOptions, EnhancedFrame, FrameSink, MessageSink,
    MessageSource, PipelineStats, Preprocessor, RequiredSet, ServiceMode, SyncOptions,
};
use g2r_wire::{encode_message, tcp_split, Hello, Message, SensorChannel};

use crate::config::{EnhancerKind, MasterConfig, RunMode, PRECISION_VOCAB};
use crate::error::CliError;

/// Side length of the thumbnail a frame is reduced to for its feature
/// vector: 8x8 RGB, 192 dimensions.
const SIGNATURE_EDGE: u32 = 8;
const SIGNATURE_DIM: u32 = SIGNATURE_EDGE * SIGNATURE_EDGE * 3;

fn world_config(cfg: &MasterConfig) -> WorldConfig {
    WorldConfig {
        seed: cfg.engine.seed,
        width: cfg.engine.width,
        height: cfg.engine.height,
        fixed_dt: cfg.engine.fixed_dt,
        weather: cfg.engine.weather,
        town_profile: cfg.engine.town_profile,
    }
}

fn service_options(cfg: &MasterConfig, hook: Option<TickHook>) -> ServiceOptions {
    ServiceOptions {
        async_interval: cfg.engine.async_interval_ms.map(Duration::from_millis),
        hook,
        ..ServiceOptions::default()
    }
}

fn build_enhancer(cfg: &MasterConfig) -> Result<Box<dyn Enhancer>, CliError> {
    let inner: Box<dyn Enhancer> = match cfg.enhancer.kind {
        EnhancerKind::Identity => Box::new(IdentityEnhancer),
        EnhancerKind::StatsMatch => {
            let path = cfg.enhancer.stats_path.as_ref().expect("checked by config");
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::input(path.clone(), e))?;
            let stats: ColorStats = serde_json::from_str(&text).map_err(|e| {
                CliError::input(path.clone(), format!("not a color statistics file: {e}"))
            })?;
            Box::new(StatsMatchEnhancer::new(stats)?)
        }
        EnhancerKind::External => {
            let endpoint = cfg.enhancer.endpoint.as_ref().expect("checked by config");
            let stream = std::net::TcpStream::connect(endpoint).map_err(|e| {
                CliError::Runtime(format!("cannot reach enhancer at {endpoint}: {e}"))
            })?;
            let (tx, rx) = tcp_split(stream)?;
            Box::new(ExternalEnhancer::new(
                Box::new(tx),
                Box::new(rx),
                Duration::from_millis(cfg.enhancer.deadline_ms),
                cfg.enhancer.send_streams,
            ))
        }
    };
    match cfg.enhancer.precision {
        PrecisionMode::F32 => Ok(inner),
        mode => Ok(Box::new(PrecisionEmulator::new(
            inner,
            mode,
            cfg.enhancer.calibration.clone(),
            None,
        )?)),
    }
}

/// Spin up an in-process engine, run the configured pipeline against it
/// for `ticks` enhanced frames, and shut the service down.
fn drive(
    cfg: &MasterConfig,
    hook: Option<TickHook>,
    ticks: u64,
    on_frame: &mut FrameSink,
) -> Result<PipelineStats, CliError> {
    let (mut tx, mut rx, server) =
        start_in_process(world_config(cfg), service_options(cfg, hook));
    let result = drive_session(cfg, tx.as_mut(), rx.as_mut(), ticks, on_frame);
    drop(tx);
    drop(rx);
    match result {
        Ok(stats) => {
            server.join()?;
            Ok(stats)
        }
        Err(err) => {
            server.stop();
            let _ = server.join();
            Err(err)
        }
    }
}

fn drive_session(
    cfg: &MasterConfig,
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    ticks: u64,
    on_frame: &mut FrameSink,
) -> Result<PipelineStats, CliError> {
    let mode = match cfg.pipeline.mode {
        RunMode::Sync => ServiceMode::Sync,
        RunMode::Async => ServiceMode::Async,
    };
    handshake(tx, rx, cfg.pipeline.subscribe.clone(), mode)?;
    let (model_w, model_h) = cfg.model_resolution();
    let preprocessor = Preprocessor::new(ClassGrouping::standard(), model_w, model_h);
    let required = RequiredSet::from_subscriptions(&cfg.pipeline.subscribe, false);
    let mut enhancer = build_enhancer(cfg)?;
    let stats = match cfg.pipeline.mode {
        RunMode::Sync => run_sync(
            tx,
            rx,
            &required,
            &preprocessor,
            enhancer.as_mut(),
            &SyncOptions {
                ticks,
                pipeline_depth: cfg.pipeline.pipeline_depth,
                tick_stride: cfg.pipeline.skip + 1,
            },
            on_frame,
        )?,
        RunMode::Async => run_async(
            tx,
            rx,
            &required,
            &preprocessor,
            enhancer.as_mut(),
            &AsyncOptions {
                frames: ticks,
                queue_capacity: cfg.pipeline.queue_capacity,
                poll: Duration::from_millis(2),
            },
            on_frame,
        )?,
    };
    Ok(stats)
}

fn frame_signature(plane: &ImagePlane) -> Result<Vec<f32>, String> {
    let small = resize_bilinear(plane, SIGNATURE_EDGE, SIGNATURE_EDGE).map_err(|e| e.to_string())?;
    Ok(small.data().to_vec())
}

fn warn_staleness(cfg: &MasterConfig, stats: &PipelineStats) {
    if cfg.pipeline.mode == RunMode::Async && stats.max_staleness > cfg.pipeline.max_staleness {
        eprintln!(
            "warning: max staleness {} exceeded the configured bound {}",
            stats.max_staleness, cfg.pipeline.max_staleness
        );
    }
}

pub fn run(
    cfg: &MasterConfig,
    features_out: Option<&Path>,
    color_stats_out: Option<&Path>,
    emit_stats: bool,
) -> Result<(), CliError> {
    let mut features = match features_out {
        Some(_) => Some(
            FeatureSet::empty("run", SIGNATURE_DIM).map_err(|e| CliError::Runtime(e.to_string()))?,
        ),
        None => None,
    };
    let mut colors = color_stats_out.map(|_| StatsAccumulator::new());
    let mut sink = |frame: EnhancedFrame| -> Result<(), String> {
        if let Some(set) = features.as_mut() {
            set.push(&frame_signature(&frame.enhanced)?)
                .map_err(|e| e.to_string())?;
        }
        if let Some(acc) = colors.as_mut() {
            acc.observe(&frame.input.rgb, &frame.input.onehot)
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    };
    let stats = drive(cfg, None, cfg.pipeline.ticks, &mut sink)?;
    if let (Some(path), Some(set)) = (features_out, features) {
        save_features(&set, path).map_err(|e| CliError::input(path.to_path_buf(), e))?;
        eprintln!("features: {} vectors -> {}", set.rows(), path.display());
    }
    if let (Some(path), Some(acc)) = (color_stats_out, colors) {
        let text =
            serde_json::to_string_pretty(&acc.finish()).expect("color statistics serialize");
        std::fs::write(path, text).map_err(|e| CliError::input(path.to_path_buf(), e))?;
        eprintln!("color statistics -> {}", path.display());
    }
    warn_staleness(cfg, &stats);
    if emit_stats {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).expect("stats serialize")
        );
    } else {
        let (model_w, model_h) = cfg.model_resolution();
        println!(
            "{} run: {} frames enhanced in {:.1} ms ({}x{} -> {}x{})",
            stats.mode,
            stats.frames_enhanced,
            stats.wall_ms,
            cfg.engine.width,
            cfg.engine.height,
            model_w,
            model_h
        );
        println!(
            "sim fps {:.1}, enhanced fps {:.1}, max staleness {}",
            stats.sim_fps, stats.enhanced_fps, stats.max_staleness
        );
    }
    Ok(())
}

pub fn capture(cfg: &MasterConfig, ticks_override: Option<u64>) -> Result<(), CliError> {
    let section = cfg
        .capture
        .as_ref()
        .ok_or_else(|| CliError::Usage("the configuration has no capture section".into()))?;
    let ticks = ticks_override.unwrap_or(cfg.pipeline.ticks);
    let mut session = CaptureSession::new(section.to_capture_config())?;
    let weather = cfg.engine.weather.name().to_string();
    let town = cfg.engine.town_profile.name().to_string();
    let seed = cfg.engine.seed;
    let mut sink = |frame: EnhancedFrame| -> Result<(), String> {
        if session.should_capture(frame.frame_id) {
            let record = WorldStatusRecord {
                weather: weather.clone(),
                tick: frame.frame_id,
                seed,
                town_profile: town.clone(),
            };
            session
                .capture(&frame.bundle, Some(&frame.enhanced), Some(&record))
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    };
    let stats = drive(cfg, None, ticks, &mut sink)?;
    println!(
        "captured {} of {} frames to {}",
        session.captures(),
        stats.frames_enhanced,
        section.out_dir.display()
    );
    println!(
        "manifest: {}",
        section.out_dir.join("manifest.jsonl").display()
    );
    Ok(())
}

pub fn scenario(
    cfg: &MasterConfig,
    path_flag: Option<&Path>,
    with_capture: bool,
    ticks_override: Option<u64>,
) -> Result<(), CliError> {
    let path = path_flag
        .or(cfg.scenario_path.as_deref())
        .ok_or_else(|| {
            CliError::Usage("no scenario file: pass --scenario or set scenario_path".into())
        })?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path.to_path_buf(), e))?;
    let scenario = Scenario::from_yaml(&text).map_err(|issues| CliError::Input {
        path: path.to_path_buf(),
        detail: issues
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("; "),
    })?;
    let name = scenario.name.clone();
    let duration = scenario.duration_ticks;
    let weather = scenario
        .weather
        .unwrap_or(cfg.engine.weather)
        .name()
        .to_string();
    let runner = ScenarioRunner::new(scenario);
    let (hook, outcome) = runner.into_hook();

    let stride = cfg.pipeline.skip + 1;
    let ticks = ticks_override.unwrap_or_else(|| duration.div_ceil(stride).max(1));

    let mut session = match with_capture {
        true => {
            let section = cfg.capture.as_ref().ok_or_else(|| {
                CliError::Usage("--capture needs a capture section in the configuration".into())
            })?;
            Some(CaptureSession::new(section.to_capture_config())?)
        }
        false => None,
    };
    let town = cfg.engine.town_profile.name().to_string();
    let seed = cfg.engine.seed;
    let mut sink = |frame: EnhancedFrame| -> Result<(), String> {
        if let Some(session) = session.as_mut() {
            if session.should_capture(frame.frame_id) {
                let record = WorldStatusRecord {
                    weather: weather.clone(),
                    tick: frame.frame_id,
                    seed,
                    town_profile: town.clone(),
                };
                session
                    .capture(&frame.bundle, Some(&frame.enhanced), Some(&record))
                    .map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    };
    let stats = drive(cfg, Some(hook), ticks, &mut sink)?;
    warn_staleness(cfg, &stats);

    let outcome = outcome.lock().expect("scenario outcome lock").clone();
    let mut report = serde_json::json!({
        "scenario": name,
        "duration_ticks": duration,
        "ticks_run": outcome.ticks_run,
        "fired": outcome.fired,
        "frames_enhanced": stats.frames_enhanced,
    });
    if let Some(session) = &session {
        report["captures"] = serde_json::json!(session.captures());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialize")
    );
    Ok(())
}

/// Parse `--matrix f32:0,f16_emulated:3`. The benchmark always runs the
/// full cross product, so the distinct precisions and skips listed form
/// the two axes.
fn parse_matrix(matrix: &str) -> Result<(Vec<PrecisionMode>, Vec<u64>), CliError> {
    let bad = |entry: &str, detail: &str| {
        CliError::Usage(format!("--matrix entry '{entry}': {detail}"))
    };
    let mut precisions: Vec<PrecisionMode> = Vec::new();
    let mut skips: Vec<u64> = Vec::new();
    for entry in matrix.split(',') {
        let entry = entry.trim();
        let (name, skip) = entry
            .split_once(':')
            .ok_or_else(|| bad(entry, "expected precision:skip"))?;
        let precision = PRECISION_VOCAB
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| *p)
            .ok_or_else(|| bad(entry, "unknown precision (f32, f16_emulated, int8_emulated)"))?;
        let skip: u64 = skip
            .parse()
            .map_err(|_| bad(entry, "skip must be a non-negative integer"))?;
        if !precisions.contains(&precision) {
            precisions.push(precision);
        }
        if !skips.contains(&skip) {
            skips.push(skip);
        }
    }
    if precisions.is_empty() {
        return Err(CliError::Usage("--matrix lists no cells".into()));
    }
    Ok((precisions, skips))
}

fn bench_error(e: EvalError) -> CliError {
    match e {
        EvalError::EmptyMatrix | EvalError::BadWorkload(_) | EvalError::ZeroWindow { .. } => {
            CliError::Config(vec![g2r_engine::yamlv::Issue::Conflict {
                path: "eval".into(),
                detail: e.to_string(),
            }])
        }
        other => CliError::Runtime(other.to_string()),
    }
}

pub fn bench(
    cfg: &MasterConfig,
    matrix: Option<&str>,
    out_json: Option<&Path>,
    out_csv: Option<&Path>,
) -> Result<(), CliError> {
    let mut workload = BenchWorkload {
        width: cfg.engine.width,
        height: cfg.engine.height,
        seed: cfg.engine.seed,
        fixed_dt: cfg.engine.fixed_dt,
        ticks: cfg.eval.ticks,
        precisions: cfg.eval.precisions.clone(),
        skips: cfg.eval.skips.clone(),
        cost: cost_for_frame_ms(cfg.eval.cost_ms, cfg.engine.width, cfg.engine.height),
        calibration_frames: cfg.eval.calibration_frames,
        pipeline_depth: cfg.eval.pipeline_depth,
    };
    if let Some(matrix) = matrix {
        let (precisions, skips) = parse_matrix(matrix)?;
        workload.precisions = precisions;
        workload.skips = skips;
    }
    eprintln!(
        "benchmark: {} x {} cells, {} ticks each at {}x{}",
        workload.precisions.len(),
        workload.skips.len(),
        workload.ticks,
        workload.width,
        workload.height
    );
    let report = fps_benchmark(&workload).map_err(bench_error)?;

    println!("workload {}", report.fingerprint);
    println!(
        "{:<14} {:>5} {:>9} {:>9} {:>9} {:>11}",
        "precision", "skip", "fps", "p50_ms", "p99_ms", "inferences"
    );
    for cell in &report.cells {
        match &cell.outcome {
            CellOutcome::Ok { metrics } => println!(
                "{:<14} {:>5} {:>9.2} {:>9.2} {:>9.2} {:>11}",
                cell.precision.name(),
                cell.skip,
                metrics.fps,
                metrics.p50_latency_s * 1e3,
                metrics.p99_latency_s * 1e3,
                metrics.inferences
            ),
            CellOutcome::Failed { cause } => println!(
                "{:<14} {:>5} failed: {cause}",
                cell.precision.name(),
                cell.skip
            ),
        }
    }
    if let Some(path) = out_json {
        std::fs::write(path, report.to_json())
            .map_err(|e| CliError::input(path.to_path_buf(), e))?;
        eprintln!("json report -> {}", path.display());
    }
    if let Some(path) = out_csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| CliError::input(path.to_path_buf(), e))?;
        eprintln!("csv report -> {}", path.display());
    }
    Ok(())
}

/// Load one grayscale class map. Pixels are class ids; anything outside
/// the class table is rejected.
fn load_semantic(path: &Path) -> Result<(u32, u32, Vec<u8>), CliError> {
    let img = image::open(path).map_err(|e| CliError::input(path.to_path_buf(), e))?;
    let gray = match img {
        image::DynamicImage::ImageLuma8(gray) => gray,
        _ => {
            return Err(CliError::input(
                path.to_path_buf(),
                "expected an 8-bit grayscale class map",
            ))
        }
    };
    let (w, h) = gray.dimensions();
    let classes = gray.into_raw();
    if let Some(&bad) = classes.iter().find(|&&c| c as usize >= CLASS_COUNT) {
        return Err(CliError::input(
            path.to_path_buf(),
            format!("pixel value {bad} is not a class id (0..{})", CLASS_COUNT - 1),
        ));
    }
    Ok((w, h, classes))
}

/// Pair up the inputs: two files, or two directories matched by file name.
fn collect_pairs(pred: &Path, gt: &Path) -> Result<Vec<(PathBuf, PathBuf)>, CliError> {
    match (pred.is_dir(), gt.is_dir()) {
        (false, false) => Ok(vec![(pred.to_path_buf(), gt.to_path_buf())]),
        (true, true) => {
            let names = |dir: &Path| -> Result<Vec<String>, CliError> {
                let mut names = Vec::new();
                let entries =
                    std::fs::read_dir(dir).map_err(|e| CliError::input(dir.to_path_buf(), e))?;
                for entry in entries {
                    let entry = entry.map_err(|e| CliError::input(dir.to_path_buf(), e))?;
                    let name = entry.file_name().to_string_lossy().into_owned();
                    if name.ends_with(".png") {
                        names.push(name);
                    }
                }
                names.sort();
                Ok(names)
            };
            let gt_names = names(gt)?;
            let pairs: Vec<(PathBuf, PathBuf)> = names(pred)?
                .into_iter()
                .filter(|name| gt_names.contains(name))
                .map(|name| (pred.join(&name), gt.join(&name)))
                .collect();
            if pairs.is_empty() {
                return Err(CliError::input(
                    pred.to_path_buf(),
                    format!("no .png files shared with {}", gt.display()),
                ));
            }
            Ok(pairs)
        }
        _ => Err(CliError::Usage(
            "eval-iou takes two files or two directories, not a mix".into(),
        )),
    }
}

pub fn eval_iou(pred: &Path, gt: &Path) -> Result<(), CliError> {
    let pairs = collect_pairs(pred, gt)?;
    let mut pred_classes: Vec<u8> = Vec::new();
    let mut gt_classes: Vec<u8> = Vec::new();
    for (p, g) in &pairs {
        let (pw, ph, pc) = load_semantic(p)?;
        let (gw, gh, gc) = load_semantic(g)?;
        if (pw, ph) != (gw, gh) {
            return Err(CliError::input(
                p.clone(),
                format!("size {pw}x{ph} does not match ground truth {gw}x{gh}"),
            ));
        }
        pred_classes.extend_from_slice(&pc);
        gt_classes.extend_from_slice(&gc);
    }
    // IoU counts pixels, not geometry, so all pairs flatten into one map.
    let pixels = pred_classes.len();
    let pred_map =
        SemanticMap::new(pixels as u32, 1, pred_classes).map_err(|e| CliError::Runtime(e.to_string()))?;
    let gt_map =
        SemanticMap::new(pixels as u32, 1, gt_classes).map_err(|e| CliError::Runtime(e.to_string()))?;
    let all: Vec<u8> = (0..CLASS_COUNT as u8).collect();
    let report = iou(&pred_map, &gt_map, &all).map_err(|e| CliError::Runtime(e.to_string()))?;

    let per_class: serde_json::Map<String, serde_json::Value> = report
        .per_class
        .iter()
        .map(|(&id, &value)| {
            (
                CLASS_NAMES[id as usize].to_string(),
                serde_json::json!(value),
            )
        })
        .collect();
    let out = serde_json::json!({
        "pairs": pairs.len(),
        "pixels": pixels,
        "mean_iou": report.mean_iou,
        "per_class": per_class,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("report serialize")
    );
    Ok(())
}

fn feature_input(path: &Path, e: EvalError) -> CliError {
    match e {
        EvalError::Io { path, source } => CliError::input(path, source),
        other => CliError::input(path.to_path_buf(), other),
    }
}

pub fn eval_cosine(a: &Path, b: &Path) -> Result<(), CliError> {
    let fa = load_features(a).map_err(|e| feature_input(a, e))?;
    let fb = load_features(b).map_err(|e| feature_input(b, e))?;
    let mean = cosine_pairwise(&fa, &fb).map_err(|e| CliError::Runtime(e.to_string()))?;
    let out = serde_json::json!({
        "a": { "label": fa.label(), "rows": fa.rows() },
        "b": { "label": fb.label(), "rows": fb.rows() },
        "dim": fa.dim(),
        "mean_cosine": mean,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("report serialize")
    );
    Ok(())
}

fn channel_name(channel: SensorChannel) -> String {
    match channel {
        SensorChannel::Rgb => "rgb".into(),
        SensorChannel::GBuffer(id) => format!("gbuffer:{}", id.name()),
        SensorChannel::OneHot => "one_hot".into(),
        SensorChannel::Lidar => "lidar".into(),
        SensorChannel::VehicleStatus => "vehicle_status".into(),
        SensorChannel::Stream(group) => format!("stream:{group}"),
        SensorChannel::ActorIds => "actor_ids".into(),
    }
}

fn describe(msg: &Message) -> String {
    match msg {
        Message::Hello(Hello::Subscribe {
            subscriptions,
            mode,
        }) => format!(
            "hello subscribe {} channels ({})",
            subscriptions.len(),
            match mode {
                ServiceMode::Sync => "sync",
                ServiceMode::Async => "async",
            }
        ),
        Message::Hello(Hello::StreamInfo { width, height, .. }) => {
            format!("hello stream_info {width}x{height}")
        }
        Message::TickRequest { frame_id } => format!("tick_request #{frame_id}"),
        Message::TickAck { frame_id } => format!("tick_ack #{frame_id}"),
        Message::Sensor(frame) => format!(
            "sensor {} #{}",
            channel_name(frame.channel),
            frame.frame_id
        ),
        Message::Control { frame_id, .. } => format!("control #{frame_id}"),
        Message::Bye => "bye".into(),
    }
}

/// Print one wire log line and return the encoded size.
fn log_message(direction: &str, msg: &Message) -> usize {
    let bytes = encode_message(msg);
    let prefix: String = bytes
        .iter()
        .take(24)
        .map(|b| format!("{b:02x}"))
        .collect();
    println!(
        "{direction} {:<34} {:>9} B  {prefix}",
        describe(msg),
        bytes.len()
    );
    bytes.len()
}

pub fn protocol_dump(cfg: &MasterConfig, ticks: u64) -> Result<(), CliError> {
    if ticks == 0 {
        return Err(CliError::Usage("--ticks must be at least 1".into()));
    }
    let (mut tx, mut rx, server) =
        start_in_process(world_config(cfg), service_options(cfg, None));
    let result = dump_session(cfg, tx.as_mut(), rx.as_mut(), ticks);
    drop(tx);
    drop(rx);
    match result {
        Ok(()) => {
            server.join()?;
            Ok(())
        }
        Err(err) => {
            server.stop();
            let _ = server.join();
            Err(err)
        }
    }
}

/// Drive a short synchronized session by hand, logging every message in
/// both directions.
fn dump_session(
    cfg: &MasterConfig,
    tx: &mut dyn MessageSink,
    rx: &mut dyn MessageSource,
    ticks: u64,
) -> Result<(), CliError> {
    let mut sent = (0u64, 0u64);
    let mut received = (0u64, 0u64);
    let mut send = |tx: &mut dyn MessageSink, msg: &Message| -> Result<(), CliError> {
        sent.0 += 1;
        sent.1 += log_message("->", msg) as u64;
        tx.send(msg)?;
        Ok(())
    };

    let hello = Message::Hello(Hello::Subscribe {
        subscriptions: cfg.pipeline.subscribe.clone(),
        mode: ServiceMode::Sync,
    });
    send(tx, &hello)?;

    for i in 1..=ticks {
        if i == 1 {
            // The stream info reply arrives before any sensor data.
            let msg = rx.recv()?;
            received.0 += 1;
            received.1 += log_message("<-", &msg) as u64;
            if !matches!(msg, Message::Hello(Hello::StreamInfo { .. })) {
                return Err(CliError::Runtime(format!(
                    "expected stream info, got {}",
                    describe(&msg)
                )));
            }
        }
        send(tx, &Message::TickRequest { frame_id: i })?;
        loop {
            let msg = rx.recv()?;
            received.0 += 1;
            received.1 += log_message("<-", &msg) as u64;
            if matches!(msg, Message::TickAck { frame_id } if frame_id == i) {
                break;
            }
        }
    }
    send(tx, &Message::Bye)?;
    println!(
        "sent {} messages ({} bytes), received {} messages ({} bytes)",
        sent.0, sent.1, received.0, received.1
    );
    Ok(())
}
