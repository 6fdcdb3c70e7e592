//! Master configuration: one YAML file with a section per stage, loaded
//! through a path-tagged validator so every mistake is reported at once,
//! every applied default is logged, and unknown keys suggest the nearest
//! known spelling.
//!
//! Precedence: file values, then `G2R_`-prefixed environment variables,
//! then `--set path=value` flags. Overrides edit the parsed YAML tree
//! before validation, so they obey the same rules as the file.

use std::path::{Path, PathBuf};

use g2r_datagen::{
    default_detection_classes, BufferContainer, CaptureConfig, DetectionClass, ImageFormat,
    Product,
};
use g2r_enhance::{Int8Params, PrecisionMode};
use g2r_engine::yamlv::{child, index, Issue, Validator};
use g2r_engine::{TownProfile, WeatherPreset};
use g2r_wire::SensorSelect;
use serde::{Deserialize, Serialize};
use serde_yaml::{Mapping, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Sync,
    Async,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Sync => "sync",
            RunMode::Async => "async",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnhancerKind {
    Identity,
    StatsMatch,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSection {
    pub mode: RunMode,
    pub width: u32,
    pub height: u32,
    pub fixed_dt: f64,
    pub seed: u64,
    pub weather: WeatherPreset,
    pub town_profile: TownProfile,
    /// Pacing between free-running frames in async mode; absent = flat out.
    pub async_interval_ms: Option<u64>,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            mode: RunMode::Sync,
            width: 960,
            height: 540,
            fixed_dt: 0.05,
            seed: 0,
            weather: WeatherPreset::ClearNoon,
            town_profile: TownProfile::Compact,
            async_interval_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSection {
    pub mode: RunMode,
    /// Simulation steps skipped between enhanced frames.
    pub skip: u64,
    pub subscribe: Vec<SensorSelect>,
    pub pipeline_depth: usize,
    pub queue_capacity: usize,
    /// Enhanced frames produced by `run` (and `capture`, unless --ticks).
    pub ticks: u64,
    /// Enhancer input resolution; absent = engine resolution.
    pub model_width: Option<u32>,
    pub model_height: Option<u32>,
    /// Async only: staleness above this draws a warning after the run.
    pub max_staleness: u64,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            mode: RunMode::Sync,
            skip: 0,
            subscribe: vec![
                SensorSelect::Rgb,
                SensorSelect::GBuffers,
                SensorSelect::Stencil,
            ],
            pipeline_depth: 1,
            queue_capacity: 1,
            ticks: 100,
            model_width: None,
            model_height: None,
            max_staleness: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnhancerSection {
    pub kind: EnhancerKind,
    pub precision: PrecisionMode,
    /// stats_match: JSON file holding reference color statistics.
    pub stats_path: Option<PathBuf>,
    /// external: TCP address of the enhancer process.
    pub endpoint: Option<String>,
    /// external: also ship the stacked g-buffer streams.
    pub send_streams: bool,
    /// external: reply deadline per frame.
    pub deadline_ms: u64,
    /// int8_emulated: per-channel quantization scales.
    pub calibration: Option<Int8Params>,
}

impl Default for EnhancerSection {
    fn default() -> Self {
        EnhancerSection {
            kind: EnhancerKind::Identity,
            precision: PrecisionMode::F32,
            stats_path: None,
            endpoint: None,
            send_streams: false,
            deadline_ms: 1000,
            calibration: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaptureSection {
    pub every_n: u64,
    pub out_dir: PathBuf,
    pub products: Vec<Product>,
    pub image_format: ImageFormat,
    /// `packed_f32` or `none`; serialized as a plain name so the dump
    /// reloads to the same choice (a bare `null` would mean "default").
    #[serde(serialize_with = "serialize_container")]
    pub buffer_container: Option<BufferContainer>,
    pub min_box_area: u64,
    pub occlusion_min_points: usize,
    pub detection_classes: Vec<DetectionClass>,
}

impl Default for CaptureSection {
    fn default() -> Self {
        let d = CaptureConfig::default();
        CaptureSection {
            every_n: d.every_n,
            out_dir: d.out_dir,
            products: d.products.into_iter().collect(),
            image_format: d.image_format,
            buffer_container: d.buffer_container,
            min_box_area: d.min_box_area,
            occlusion_min_points: d.occlusion_min_points,
            detection_classes: d.detection_classes,
        }
    }
}

fn serialize_container<S>(
    value: &Option<BufferContainer>,
    s: S,
) -> Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    match value {
        Some(BufferContainer::PackedF32) => s.serialize_str("packed_f32"),
        None => s.serialize_str("none"),
    }
}

impl CaptureSection {
    pub fn to_capture_config(&self) -> CaptureConfig {
        CaptureConfig {
            every_n: self.every_n,
            out_dir: self.out_dir.clone(),
            products: self.products.iter().copied().collect(),
            image_format: self.image_format,
            buffer_container: self.buffer_container,
            min_box_area: self.min_box_area,
            occlusion_min_points: self.occlusion_min_points,
            detection_classes: self.detection_classes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSection {
    /// Simulation ticks per benchmark cell.
    pub ticks: u64,
    /// Simulated f32 inference cost per frame at engine resolution.
    pub cost_ms: f64,
    pub precisions: Vec<PrecisionMode>,
    pub skips: Vec<u64>,
    pub calibration_frames: u64,
    pub pipeline_depth: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            ticks: 40,
            cost_ms: 4.0,
            precisions: vec![PrecisionMode::F32, PrecisionMode::F16Emulated],
            skips: vec![0, 1, 3],
            calibration_frames: 4,
            pipeline_depth: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MasterConfig {
    pub engine: EngineSection,
    pub pipeline: PipelineSection,
    pub enhancer: EnhancerSection,
    pub capture: Option<CaptureSection>,
    pub scenario_path: Option<PathBuf>,
    pub eval: EvalSection,
}

impl MasterConfig {
    /// Enhancer input resolution, falling back to the engine's.
    pub fn model_resolution(&self) -> (u32, u32) {
        (
            self.pipeline.model_width.unwrap_or(self.engine.width),
            self.pipeline.model_height.unwrap_or(self.engine.height),
        )
    }
}

#[derive(Debug)]
pub struct LoadedConfig {
    pub config: MasterConfig,
    /// One line per default the file did not spell out.
    pub defaults: Vec<String>,
}

/// Read, override, and validate. `path` of `None` starts from an empty
/// document, so a missing --config still yields the documented defaults.
pub fn load_config(
    path: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<LoadedConfig, CliError> {
    let mut root = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Input {
                path: p.to_path_buf(),
                detail: e.to_string(),
            })?;
            serde_yaml::from_str(&text)
                .map_err(|e| CliError::Config(vec![Issue::Parse(e.to_string())]))?
        }
        None => Value::Null,
    };
    for (key, value) in overrides {
        apply_override(&mut root, key, value)?;
    }
    let (config, defaults) = validate_value(&root).map_err(CliError::Config)?;
    Ok(LoadedConfig { config, defaults })
}

/// Rewrite one dotted path in the YAML tree. The value goes through the
/// YAML scalar parser, so `--set pipeline.skip=3` yields a number and
/// `--set eval.skips=[0,1,3]` a sequence.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<(), CliError> {
    let bad = |detail: &str| CliError::BadOverride {
        path: path.to_string(),
        detail: detail.to_string(),
    };
    if path.is_empty() {
        return Err(bad("empty path"));
    }
    let parsed: Value =
        serde_yaml::from_str(raw).map_err(|e| bad(&format!("value does not parse: {e}")))?;
    if root.is_null() {
        *root = Value::Mapping(Mapping::new());
    }
    let mut node = &mut *root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(bad("empty path segment"));
        }
        let map = match node {
            Value::Mapping(m) => m,
            _ => return Err(bad("path crosses a non-mapping value")),
        };
        let key = Value::String(segment.to_string());
        if i + 1 == segments.len() {
            map.insert(key, parsed);
            return Ok(());
        }
        let entry = map.entry(key).or_insert(Value::Mapping(Mapping::new()));
        if entry.is_null() {
            *entry = Value::Mapping(Mapping::new());
        }
        node = entry;
    }
    unreachable!("loop returns on the last segment");
}

/// Split a `--set path=value` argument.
pub fn parse_set(arg: &str) -> Result<(String, String), CliError> {
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(CliError::BadOverride {
            path: arg.to_string(),
            detail: "expected path=value".to_string(),
        }),
    }
}

/// Collect `G2R_`-prefixed environment variables as overrides. Double
/// underscores separate path levels: `G2R_PIPELINE__QUEUE_CAPACITY=4`
/// sets `pipeline.queue_capacity`. Sorted for deterministic precedence.
pub fn env_overrides() -> Vec<(String, String)> {
    let mut pairs: Vec<(String, String)> = std::env::vars()
        .filter_map(|(key, value)| {
            let rest = key.strip_prefix("G2R_")?;
            if rest.is_empty() {
                return None;
            }
            Some((rest.to_lowercase().replace("__", "."), value))
        })
        .collect();
    pairs.sort();
    pairs
}

/// Serialize the effective config; loading the dump yields an equal
/// config with no defaults applied.
pub fn dump_config(config: &MasterConfig) -> String {
    serde_yaml::to_string(config).expect("config serializes")
}

/// Validate a parsed YAML document into a config plus the defaults log.
pub fn validate_value(root: &Value) -> Result<(MasterConfig, Vec<String>), Vec<Issue>> {
    let mut v = Validator::new();
    let mut defaults = Vec::new();
    let config = read_master(&mut v, root, &mut defaults);
    v.finish(config.map(|c| (c, defaults)))
}

/// Field lookup that treats explicit `null` like an absent key, so a
/// dumped config (where `None` prints as `null`) reloads cleanly.
fn get<'a>(map: &'a Mapping, key: &str) -> Option<&'a Value> {
    map.get(Value::String(key.to_string()))
        .filter(|value| !value.is_null())
}

struct Ctx<'a> {
    v: &'a mut Validator,
    defaults: &'a mut Vec<String>,
}

impl<'a> Ctx<'a> {
    fn log_default(&mut self, path: &str, key: &str, value: impl std::fmt::Display) {
        self.defaults.push(format!("{} = {value}", child(path, key)));
    }

    fn u64_field(&mut self, map: &Mapping, path: &str, key: &str, default: u64, min: u64) -> u64 {
        match get(map, key) {
            Some(value) => self
                .v
                .u64_in(value, &child(path, key), min, u64::MAX)
                .unwrap_or(default),
            None => {
                self.log_default(path, key, default);
                default
            }
        }
    }

    fn u32_field(&mut self, map: &Mapping, path: &str, key: &str, default: u32, min: u32) -> u32 {
        match get(map, key) {
            Some(value) => self
                .v
                .u64_in(value, &child(path, key), min as u64, u32::MAX as u64)
                .map(|n| n as u32)
                .unwrap_or(default),
            None => {
                self.log_default(path, key, default);
                default
            }
        }
    }

    fn f64_field(
        &mut self,
        map: &Mapping,
        path: &str,
        key: &str,
        default: f64,
        min: f64,
        max: f64,
    ) -> f64 {
        match get(map, key) {
            Some(value) => self
                .v
                .f64_in(value, &child(path, key), min, max)
                .unwrap_or(default),
            None => {
                self.log_default(path, key, default);
                default
            }
        }
    }

    fn bool_field(&mut self, map: &Mapping, path: &str, key: &str, default: bool) -> bool {
        match get(map, key) {
            Some(value) => self
                .v
                .boolean(value, &child(path, key))
                .unwrap_or(default),
            None => {
                self.log_default(path, key, default);
                default
            }
        }
    }

}

const KIND_VOCAB: [(&str, EnhancerKind); 3] = [
    ("identity", EnhancerKind::Identity),
    ("stats_match", EnhancerKind::StatsMatch),
    ("external", EnhancerKind::External),
];

pub(crate) const PRECISION_VOCAB: [(&str, PrecisionMode); 3] = [
    ("f32", PrecisionMode::F32),
    ("f16_emulated", PrecisionMode::F16Emulated),
    ("int8_emulated", PrecisionMode::Int8Emulated),
];

const SUBSCRIBE_VOCAB: [(&str, SensorSelect); 6] = [
    ("rgb", SensorSelect::Rgb),
    ("g_buffers", SensorSelect::GBuffers),
    ("stencil", SensorSelect::Stencil),
    ("lidar", SensorSelect::Lidar),
    ("vehicle_status", SensorSelect::VehicleStatus),
    ("actor_ids", SensorSelect::ActorIds),
];

const PRODUCT_VOCAB: [(&str, Product); 7] = [
    ("frame", Product::Frame),
    ("enhanced_frame", Product::EnhancedFrame),
    ("semantic", Product::Semantic),
    ("depth", Product::Depth),
    ("boxes", Product::Boxes),
    ("vehicle_status", Product::VehicleStatus),
    ("world_status", Product::WorldStatus),
];

fn read_master(
    v: &mut Validator,
    root: &Value,
    defaults: &mut Vec<String>,
) -> Option<MasterConfig> {
    let map = v.mapping(root, "")?;
    v.check_unknown(
        map,
        "",
        &[
            "engine",
            "pipeline",
            "enhancer",
            "capture",
            "scenario_path",
            "eval",
        ],
    );
    let capture_present = get(map, "capture").is_some();

    let engine = read_engine(v, map, defaults);
    let pipeline = read_pipeline(v, map, defaults, capture_present);
    let enhancer = read_enhancer(v, map, defaults);
    let capture = read_capture(v, map, defaults);
    let eval = read_eval(v, map, defaults);

    let scenario_path = match get(map, "scenario_path") {
        Some(value) => v.string(value, "scenario_path").map(PathBuf::from),
        None => None,
    };

    let config = MasterConfig {
        engine,
        pipeline,
        enhancer,
        capture,
        scenario_path,
        eval,
    };
    cross_field(v, &config);
    Some(config)
}

fn read_engine(v: &mut Validator, root: &Mapping, defaults: &mut Vec<String>) -> EngineSection {
    let path = "engine";
    let d = EngineSection::default();
    let map = match get(root, "engine") {
        Some(value) => match v.mapping(value, path) {
            Some(m) => m.clone(),
            None => Mapping::new(),
        },
        None => Mapping::new(),
    };
    v.check_unknown(
        &map,
        path,
        &[
            "mode",
            "width",
            "height",
            "fixed_dt",
            "seed",
            "weather",
            "town_profile",
            "async_interval_ms",
        ],
    );
    let mut ctx = Ctx { v, defaults };
    let mode = match get(&map, "mode") {
        Some(value) => match ctx.v.one_of(value, "engine.mode", &["sync", "async"]) {
            Some(name) if name == "async" => RunMode::Async,
            Some(_) => RunMode::Sync,
            None => d.mode,
        },
        None => {
            ctx.log_default(path, "mode", d.mode.name());
            d.mode
        }
    };
    let width = ctx.u32_field(&map, path, "width", d.width, 16);
    let height = ctx.u32_field(&map, path, "height", d.height, 16);
    let fixed_dt = ctx.f64_field(&map, path, "fixed_dt", d.fixed_dt, 1.0e-4, 10.0);
    let seed = ctx.u64_field(&map, path, "seed", d.seed, 0);
    let weather = match get(&map, "weather") {
        Some(value) => {
            let allowed: Vec<&str> = WeatherPreset::ALL.iter().map(|w| w.name()).collect();
            match ctx.v.one_of(value, "engine.weather", &allowed) {
                Some(name) => WeatherPreset::from_name(&name).expect("validated name"),
                None => d.weather,
            }
        }
        None => {
            ctx.log_default(path, "weather", d.weather.name());
            d.weather
        }
    };
    let town_profile = match get(&map, "town_profile") {
        Some(value) => match ctx
            .v
            .one_of(value, "engine.town_profile", &["compact", "sprawl"])
        {
            Some(name) => TownProfile::from_name(&name).expect("validated name"),
            None => d.town_profile,
        },
        None => {
            ctx.log_default(path, "town_profile", d.town_profile.name());
            d.town_profile
        }
    };
    let async_interval_ms = get(&map, "async_interval_ms")
        .and_then(|value| ctx.v.u64_in(value, "engine.async_interval_ms", 1, 60_000));
    EngineSection {
        mode,
        width,
        height,
        fixed_dt,
        seed,
        weather,
        town_profile,
        async_interval_ms,
    }
}

fn read_pipeline(
    v: &mut Validator,
    root: &Mapping,
    defaults: &mut Vec<String>,
    capture_present: bool,
) -> PipelineSection {
    let path = "pipeline";
    let d = PipelineSection::default();
    let map = match get(root, "pipeline") {
        Some(value) => match v.mapping(value, path) {
            Some(m) => m.clone(),
            None => Mapping::new(),
        },
        None => Mapping::new(),
    };
    v.check_unknown(
        &map,
        path,
        &[
            "mode",
            "skip",
            "subscribe",
            "pipeline_depth",
            "queue_capacity",
            "ticks",
            "model_width",
            "model_height",
            "max_staleness",
        ],
    );
    let mut ctx = Ctx { v, defaults };
    let mode = match get(&map, "mode") {
        Some(value) => match ctx.v.one_of(value, "pipeline.mode", &["sync", "async"]) {
            Some(name) if name == "async" => RunMode::Async,
            Some(_) => RunMode::Sync,
            None => d.mode,
        },
        None => {
            ctx.log_default(path, "mode", d.mode.name());
            d.mode
        }
    };
    let skip = ctx.u64_field(&map, path, "skip", d.skip, 0);
    let pipeline_depth = ctx.u64_field(&map, path, "pipeline_depth", d.pipeline_depth as u64, 1);
    let queue_capacity = ctx.u64_field(&map, path, "queue_capacity", d.queue_capacity as u64, 1);
    let ticks = ctx.u64_field(&map, path, "ticks", d.ticks, 1);
    let max_staleness = ctx.u64_field(&map, path, "max_staleness", d.max_staleness, 0);
    let model_width = get(&map, "model_width")
        .and_then(|value| ctx.v.u64_in(value, "pipeline.model_width", 16, u32::MAX as u64))
        .map(|n| n as u32);
    let model_height = get(&map, "model_height")
        .and_then(|value| ctx.v.u64_in(value, "pipeline.model_height", 16, u32::MAX as u64))
        .map(|n| n as u32);

    let subscribe = match get(&map, "subscribe") {
        Some(value) => {
            let mut subs = Vec::new();
            if let Some(seq) = ctx.v.sequence(value, "pipeline.subscribe") {
                let allowed: Vec<&str> = SUBSCRIBE_VOCAB.iter().map(|(n, _)| *n).collect();
                for (i, item) in seq.iter().enumerate() {
                    let at = index("pipeline.subscribe", i);
                    if let Some(name) = ctx.v.one_of(item, &at, &allowed) {
                        let select = SUBSCRIBE_VOCAB
                            .iter()
                            .find(|(n, _)| *n == name)
                            .expect("validated name")
                            .1;
                        if subs.contains(&select) {
                            ctx.v.conflict(&at, format!("duplicate channel '{name}'"));
                        } else {
                            subs.push(select);
                        }
                    }
                }
            }
            if subs.is_empty() {
                ctx.v
                    .conflict("pipeline.subscribe", "at least one channel is required");
            }
            subs
        }
        None => {
            // Capture needs the annotation channels, so its presence
            // widens the default subscription.
            let subs = if capture_present {
                SUBSCRIBE_VOCAB.iter().map(|(_, s)| *s).collect()
            } else {
                d.subscribe.clone()
            };
            let names: Vec<&str> = subs
                .iter()
                .map(|s| {
                    SUBSCRIBE_VOCAB
                        .iter()
                        .find(|(_, v)| v == s)
                        .expect("vocab covers all channels")
                        .0
                })
                .collect();
            ctx.log_default(path, "subscribe", format!("[{}]", names.join(", ")));
            subs
        }
    };

    PipelineSection {
        mode,
        skip,
        subscribe,
        pipeline_depth: pipeline_depth as usize,
        queue_capacity: queue_capacity as usize,
        ticks,
        model_width,
        model_height,
        max_staleness,
    }
}

fn read_enhancer(v: &mut Validator, root: &Mapping, defaults: &mut Vec<String>) -> EnhancerSection {
    let path = "enhancer";
    let d = EnhancerSection::default();
    let map = match get(root, "enhancer") {
        Some(value) => match v.mapping(value, path) {
            Some(m) => m.clone(),
            None => Mapping::new(),
        },
        None => Mapping::new(),
    };
    v.check_unknown(
        &map,
        path,
        &[
            "kind",
            "precision",
            "stats_path",
            "endpoint",
            "send_streams",
            "deadline_ms",
            "calibration",
        ],
    );
    let mut ctx = Ctx { v, defaults };
    let kind = match get(&map, "kind") {
        Some(value) => {
            let allowed: Vec<&str> = KIND_VOCAB.iter().map(|(n, _)| *n).collect();
            match ctx.v.one_of(value, "enhancer.kind", &allowed) {
                Some(name) => {
                    KIND_VOCAB
                        .iter()
                        .find(|(n, _)| *n == name)
                        .expect("validated name")
                        .1
                }
                None => d.kind,
            }
        }
        None => {
            ctx.log_default(path, "kind", "identity");
            d.kind
        }
    };
    let precision = match get(&map, "precision") {
        Some(value) => {
            let allowed: Vec<&str> = PRECISION_VOCAB.iter().map(|(n, _)| *n).collect();
            match ctx.v.one_of(value, "enhancer.precision", &allowed) {
                Some(name) => {
                    PRECISION_VOCAB
                        .iter()
                        .find(|(n, _)| *n == name)
                        .expect("validated name")
                        .1
                }
                None => d.precision,
            }
        }
        None => {
            ctx.log_default(path, "precision", "f32");
            d.precision
        }
    };
    let stats_path = get(&map, "stats_path")
        .and_then(|value| ctx.v.string(value, "enhancer.stats_path"))
        .map(PathBuf::from);
    let endpoint = get(&map, "endpoint").and_then(|value| ctx.v.string(value, "enhancer.endpoint"));
    let send_streams = ctx.bool_field(&map, path, "send_streams", d.send_streams);
    let deadline_ms = ctx.u64_field(&map, path, "deadline_ms", d.deadline_ms, 1);
    let calibration = match get(&map, "calibration") {
        Some(value) => read_calibration(ctx.v, value),
        None => None,
    };
    EnhancerSection {
        kind,
        precision,
        stats_path,
        endpoint,
        send_streams,
        deadline_ms,
        calibration,
    }
}

fn read_calibration(v: &mut Validator, value: &Value) -> Option<Int8Params> {
    let path = "enhancer.calibration";
    let map = v.mapping(value, path)?;
    v.check_unknown(map, path, &["scales"]);
    let seq = v.require(map, path, "scales")?;
    let seq = v.sequence(seq, &child(path, "scales"))?;
    if seq.len() != 3 {
        v.conflict(
            &child(path, "scales"),
            format!("expected 3 per-channel scales, got {}", seq.len()),
        );
        return None;
    }
    let mut scales = [0.0f32; 3];
    for (i, item) in seq.iter().enumerate() {
        let at = index(&child(path, "scales"), i);
        scales[i] = v.f64_in(item, &at, 1.0e-9, 1.0e9)? as f32;
    }
    Some(Int8Params { scales })
}

fn read_capture(
    v: &mut Validator,
    root: &Mapping,
    defaults: &mut Vec<String>,
) -> Option<CaptureSection> {
    let path = "capture";
    let value = get(root, "capture")?;
    let d = CaptureSection::default();
    let map = v.mapping(value, path)?.clone();
    v.check_unknown(
        &map,
        path,
        &[
            "every_n",
            "out_dir",
            "products",
            "image_format",
            "buffer_container",
            "min_box_area",
            "occlusion_min_points",
            "detection_classes",
        ],
    );
    let mut ctx = Ctx { v, defaults };
    let every_n = ctx.u64_field(&map, path, "every_n", d.every_n, 1);
    let out_dir = match get(&map, "out_dir") {
        Some(value) => ctx
            .v
            .string(value, "capture.out_dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| d.out_dir.clone()),
        None => {
            ctx.log_default(path, "out_dir", d.out_dir.display());
            d.out_dir.clone()
        }
    };
    let products = match get(&map, "products") {
        Some(value) => {
            let mut products = Vec::new();
            if let Some(seq) = ctx.v.sequence(value, "capture.products") {
                let allowed: Vec<&str> = PRODUCT_VOCAB.iter().map(|(n, _)| *n).collect();
                for (i, item) in seq.iter().enumerate() {
                    let at = index("capture.products", i);
                    if let Some(name) = ctx.v.one_of(item, &at, &allowed) {
                        let product = PRODUCT_VOCAB
                            .iter()
                            .find(|(n, _)| *n == name)
                            .expect("validated name")
                            .1;
                        if products.contains(&product) {
                            ctx.v.conflict(&at, format!("duplicate product '{name}'"));
                        } else {
                            products.push(product);
                        }
                    }
                }
            }
            if products.is_empty() {
                ctx.v
                    .conflict("capture.products", "at least one product is required");
            }
            products
        }
        None => {
            ctx.log_default(path, "products", "[all]");
            d.products.clone()
        }
    };
    let image_format = match get(&map, "image_format") {
        Some(value) => match ctx.v.one_of(value, "capture.image_format", &["png", "jpg"]) {
            Some(name) if name == "jpg" => ImageFormat::Jpg,
            Some(_) => ImageFormat::Png,
            None => d.image_format,
        },
        None => {
            ctx.log_default(path, "image_format", "png");
            d.image_format
        }
    };
    let buffer_container = match get(&map, "buffer_container") {
        Some(value) => match ctx
            .v
            .one_of(value, "capture.buffer_container", &["packed_f32", "none"])
        {
            Some(name) if name == "packed_f32" => Some(BufferContainer::PackedF32),
            Some(_) => None,
            None => d.buffer_container,
        },
        None => {
            ctx.log_default(path, "buffer_container", "packed_f32");
            d.buffer_container
        }
    };
    let min_box_area = ctx.u64_field(&map, path, "min_box_area", d.min_box_area, 1);
    let occlusion_min_points = ctx.u64_field(
        &map,
        path,
        "occlusion_min_points",
        d.occlusion_min_points as u64,
        0,
    ) as usize;
    let detection_classes = match get(&map, "detection_classes") {
        Some(value) => {
            let mut classes = Vec::new();
            if let Some(seq) = ctx.v.sequence(value, "capture.detection_classes") {
                for (i, item) in seq.iter().enumerate() {
                    let at = index("capture.detection_classes", i);
                    if let Some(entry) = ctx.v.mapping(item, &at) {
                        let entry = entry.clone();
                        ctx.v.check_unknown(&entry, &at, &["name", "class_id"]);
                        let name = ctx
                            .v
                            .require(&entry, &at, "name")
                            .cloned()
                            .and_then(|val| ctx.v.string(&val, &child(&at, "name")));
                        let class_id = ctx
                            .v
                            .require(&entry, &at, "class_id")
                            .cloned()
                            .and_then(|val| {
                                ctx.v.u64_in(
                                    &val,
                                    &child(&at, "class_id"),
                                    0,
                                    g2r_core::CLASS_COUNT as u64 - 1,
                                )
                            });
                        if let (Some(name), Some(class_id)) = (name, class_id) {
                            classes.push(DetectionClass {
                                name,
                                class_id: class_id as u8,
                            });
                        }
                    }
                }
            }
            classes
        }
        None => {
            ctx.log_default(path, "detection_classes", "[default vehicle/person set]");
            default_detection_classes()
        }
    };
    Some(CaptureSection {
        every_n,
        out_dir,
        products,
        image_format,
        buffer_container,
        min_box_area,
        occlusion_min_points,
        detection_classes,
    })
}

fn read_eval(v: &mut Validator, root: &Mapping, defaults: &mut Vec<String>) -> EvalSection {
    let path = "eval";
    let d = EvalSection::default();
    let map = match get(root, "eval") {
        Some(value) => match v.mapping(value, path) {
            Some(m) => m.clone(),
            None => Mapping::new(),
        },
        None => Mapping::new(),
    };
    v.check_unknown(
        &map,
        path,
        &[
            "ticks",
            "cost_ms",
            "precisions",
            "skips",
            "calibration_frames",
            "pipeline_depth",
        ],
    );
    let mut ctx = Ctx { v, defaults };
    let ticks = ctx.u64_field(&map, path, "ticks", d.ticks, 2);
    let cost_ms = ctx.f64_field(&map, path, "cost_ms", d.cost_ms, 0.0, 10_000.0);
    let calibration_frames =
        ctx.u64_field(&map, path, "calibration_frames", d.calibration_frames, 0);
    let pipeline_depth =
        ctx.u64_field(&map, path, "pipeline_depth", d.pipeline_depth as u64, 1) as usize;
    let precisions = match get(&map, "precisions") {
        Some(value) => {
            let mut precisions = Vec::new();
            if let Some(seq) = ctx.v.sequence(value, "eval.precisions") {
                let allowed: Vec<&str> = PRECISION_VOCAB.iter().map(|(n, _)| *n).collect();
                for (i, item) in seq.iter().enumerate() {
                    let at = index("eval.precisions", i);
                    if let Some(name) = ctx.v.one_of(item, &at, &allowed) {
                        precisions.push(
                            PRECISION_VOCAB
                                .iter()
                                .find(|(n, _)| *n == name)
                                .expect("validated name")
                                .1,
                        );
                    }
                }
            }
            if precisions.is_empty() {
                ctx.v
                    .conflict("eval.precisions", "at least one precision is required");
            }
            precisions
        }
        None => {
            ctx.log_default(path, "precisions", "[f32, f16_emulated]");
            d.precisions.clone()
        }
    };
    let skips = match get(&map, "skips") {
        Some(value) => {
            let mut skips = Vec::new();
            if let Some(seq) = ctx.v.sequence(value, "eval.skips") {
                for (i, item) in seq.iter().enumerate() {
                    let at = index("eval.skips", i);
                    if let Some(skip) = ctx.v.u64_in(item, &at, 0, 1_000) {
                        skips.push(skip);
                    }
                }
            }
            if skips.is_empty() {
                ctx.v.conflict("eval.skips", "at least one skip is required");
            }
            skips
        }
        None => {
            ctx.log_default(path, "skips", "[0, 1, 3]");
            d.skips.clone()
        }
    };
    EvalSection {
        ticks,
        cost_ms,
        precisions,
        skips,
        calibration_frames,
        pipeline_depth,
    }
}

/// Rules that cut across sections; checked on the assembled config so
/// they see defaults and overrides alike.
fn cross_field(v: &mut Validator, config: &MasterConfig) {
    let has = |s: SensorSelect| config.pipeline.subscribe.contains(&s);
    // Preprocessing always needs its three lanes; a bundle cannot even
    // assemble without them.
    for (select, name) in [
        (SensorSelect::Rgb, "rgb"),
        (SensorSelect::GBuffers, "g_buffers"),
        (SensorSelect::Stencil, "stencil"),
    ] {
        if !has(select) {
            v.conflict(
                "pipeline.subscribe",
                format!("preprocessing requires the '{name}' channel"),
            );
        }
    }
    if config.engine.mode != config.pipeline.mode {
        v.conflict(
            "pipeline.mode",
            format!(
                "engine.mode is {}, pipeline.mode must match (a free-running engine needs a \
                 free-running client and vice versa)",
                config.engine.mode.name()
            ),
        );
    }
    if let Some(capture) = &config.capture {
        if config.pipeline.mode != RunMode::Sync || config.engine.mode != RunMode::Sync {
            v.conflict(
                "capture",
                "dataset capture requires synchronous mode on both engine and pipeline",
            );
        }
        let (mw, mh) = config.model_resolution();
        if mw != config.engine.width || mh != config.engine.height {
            v.conflict(
                "pipeline.model_width",
                "capture pairs raw and enhanced frames, so the model resolution must equal \
                 the engine resolution",
            );
        }
        if capture.products.contains(&Product::Boxes)
            && !(has(SensorSelect::Lidar) && has(SensorSelect::ActorIds))
        {
            v.conflict(
                "capture.products",
                "the boxes product needs 'lidar' and 'actor_ids' in pipeline.subscribe",
            );
        }
        if capture.products.contains(&Product::VehicleStatus) && !has(SensorSelect::VehicleStatus) {
            v.conflict(
                "capture.products",
                "the vehicle_status product needs 'vehicle_status' in pipeline.subscribe",
            );
        }
    }
    match config.enhancer.kind {
        EnhancerKind::StatsMatch if config.enhancer.stats_path.is_none() => {
            v.push(Issue::MissingField {
                path: "enhancer".into(),
                field: "stats_path".into(),
            });
        }
        EnhancerKind::External if config.enhancer.endpoint.is_none() => {
            v.push(Issue::MissingField {
                path: "enhancer".into(),
                field: "endpoint".into(),
            });
        }
        _ => {}
    }
    if config.enhancer.precision == PrecisionMode::Int8Emulated
        && config.enhancer.calibration.is_none()
    {
        v.push(Issue::MissingField {
            path: "enhancer".into(),
            field: "calibration".into(),
        });
    }
}
