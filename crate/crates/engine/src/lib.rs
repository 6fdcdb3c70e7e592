//! Deterministic mock driving engine.
//!
//! The engine stands in for a full simulator: it owns a seeded world of
//! boxy actors on a straight road, renders deferred-style buffers with a
//! per-pixel ray caster, sweeps a semantic lidar, and serves everything
//! over the wire protocol in sync (tick-request driven) or async
//! (free-running) mode. Given the same seed, tick count and controls, every
//! byte it emits is identical across runs.

pub mod error;
pub mod lidar;
pub mod math;
pub mod render;
pub mod scenario;
pub mod service;
pub mod weather;
pub mod world;
pub mod yamlv;

pub use error::EngineError;
pub use lidar::LidarConfig;
pub use math::Vec3;
pub use render::{render_sensors, RenderOutput};
pub use scenario::{Scenario, ScenarioOutcome, ScenarioRunner, TriggerAction};
pub use service::{start_in_process, start_tcp, ServerHandle, ServiceOptions};
pub use weather::{WeatherParams, WeatherPreset};
pub use world::{Actor, ActorShape, Controls, TownProfile, World, WorldConfig};
