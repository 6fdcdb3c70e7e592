//! Scripted scenes. A scenario YAML names a weather, places the ego and a
//! cast of actors, and attaches proximity triggers that fire once when the
//! ego closes within a distance. The runner compiles to a tick hook so the
//! service replays it without special casing.

use std::sync::{Arc, Mutex};

use g2r_core::semantic::class_id;
use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::service::TickHook;
use crate::weather::WeatherPreset;
use crate::world::{vehicle_half, Actor, ActorShape, World};
use crate::yamlv::{self, Issue, Validator};

/// Classes a scenario may spawn, by YAML name.
const ACTOR_CLASSES: &[(&str, u8)] = &[
    ("car", class_id::CAR),
    ("truck", class_id::TRUCK),
    ("bus", class_id::BUS),
    ("motorcycle", class_id::MOTORCYCLE),
    ("bicycle", class_id::BICYCLE),
    ("pedestrian", class_id::PEDESTRIAN),
    ("rider", class_id::RIDER),
];

fn class_names() -> Vec<&'static str> {
    ACTOR_CLASSES.iter().map(|(n, _)| *n).collect()
}

fn class_by_name(name: &str) -> Option<u8> {
    ACTOR_CLASSES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
}

fn shape_for_class(class: u8) -> ActorShape {
    let half = match class {
        class_id::PEDESTRIAN => Vec3::new(0.25, 0.25, 0.85),
        class_id::RIDER => Vec3::new(0.9, 0.4, 0.85),
        other => vehicle_half(other),
    };
    ActorShape::Box { half }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TriggerAction {
    /// Halt the actor in place.
    Stop,
    /// Retarget the actor's cruise speed.
    SetSpeed { speed_mps: f64 },
    /// Point the actor somewhere new.
    SetHeading { heading_deg: f64 },
    /// Override the ego controls, e.g. emergency braking.
    EgoControl { throttle: f64, brake: f64, steer: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trigger {
    /// Fires once when the ego gets this close (meters, 2D).
    pub distance_m: f64,
    pub action: TriggerAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSpec {
    pub class_name: String,
    pub class: u8,
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub speed_mps: f64,
    pub trigger: Option<Trigger>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoSpec {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub throttle: f64,
    pub brake: f64,
    pub steer: f64,
}

impl Default for EgoSpec {
    fn default() -> Self {
        EgoSpec {
            x: -100.0,
            y: -2.0,
            heading_deg: 0.0,
            throttle: 0.0,
            brake: 0.0,
            steer: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub duration_ticks: u64,
    pub weather: Option<WeatherPreset>,
    pub ego: EgoSpec,
    pub actors: Vec<ActorSpec>,
    /// When true, the procedural traffic is removed so only scripted
    /// actors move; scenery stays for visual context.
    pub exclusive_cast: bool,
}

impl Scenario {
    /// Parse and validate a YAML document, reporting every issue at once.
    pub fn from_yaml(text: &str) -> Result<Scenario, Vec<Issue>> {
        let value: serde_yaml::Value =
            serde_yaml::from_str(text).map_err(|e| vec![Issue::Parse(e.to_string())])?;
        let mut v = Validator::new();
        let scenario = read_scenario(&mut v, &value);
        v.finish(scenario)
    }

    /// Rewrite the world to open the scene: weather, ego pose, cast.
    /// Returns the spawned actors' ids, in spec order. Ids are allocated
    /// past everything that ever lived in this world, including traffic
    /// removed by `exclusive_cast`.
    pub fn install(&self, world: &mut World) -> Vec<u64> {
        if let Some(weather) = self.weather {
            world.config.weather = weather;
        }
        let mut next_id = world
            .actors
            .iter()
            .map(|a| a.id)
            .max()
            .unwrap_or(1)
            .max(world.ego.id)
            + 1;
        if self.exclusive_cast {
            world.actors.retain(|a| !a.mobile);
        }
        world.ego.pos = Vec3::new(self.ego.x, self.ego.y, 0.0);
        world.ego.heading = self.ego.heading_deg.to_radians();
        world.ego.speed = 0.0;
        world.apply_controls(self.ego.throttle, self.ego.brake, self.ego.steer);

        let mut spawned = Vec::with_capacity(self.actors.len());
        for spec in &self.actors {
            world.actors.push(Actor {
                id: next_id,
                class: spec.class,
                pos: Vec3::new(spec.x, spec.y, 0.0),
                heading: spec.heading_deg.to_radians(),
                speed: spec.speed_mps,
                shape: shape_for_class(spec.class),
                mobile: true,
            });
            spawned.push(next_id);
            next_id += 1;
        }
        spawned
    }
}

/// One fired trigger: which actor spec, at which frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredTrigger {
    pub actor_index: usize,
    pub frame_id: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub fired: Vec<FiredTrigger>,
    pub ticks_run: u64,
}

/// Drives a scenario inside the engine tick loop. `before_tick` must be
/// called once per tick, before the world advances.
pub struct ScenarioRunner {
    scenario: Scenario,
    installed: bool,
    /// Scenario actor index -> world actor id, filled at install time.
    actor_ids: Vec<u64>,
    pending: Vec<bool>,
    outcome: Arc<Mutex<ScenarioOutcome>>,
}

impl ScenarioRunner {
    pub fn new(scenario: Scenario) -> Self {
        let pending = scenario.actors.iter().map(|a| a.trigger.is_some()).collect();
        ScenarioRunner {
            scenario,
            installed: false,
            actor_ids: Vec::new(),
            pending,
            outcome: Arc::new(Mutex::new(ScenarioOutcome::default())),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Shared view of trigger firings; survives moving the runner into a hook.
    pub fn outcome_handle(&self) -> Arc<Mutex<ScenarioOutcome>> {
        Arc::clone(&self.outcome)
    }

    pub fn duration_ticks(&self) -> u64 {
        self.scenario.duration_ticks
    }

    pub fn before_tick(&mut self, world: &mut World) {
        if !self.installed {
            self.actor_ids = self.scenario.install(world);
            self.installed = true;
        }
        let ego_pos = world.ego.pos;
        for (i, spec) in self.scenario.actors.iter().enumerate() {
            if !self.pending[i] {
                continue;
            }
            let Some(trigger) = &spec.trigger else { continue };
            let Some(actor) = world.actor_by_id(self.actor_ids[i]) else {
                continue;
            };
            let dx = actor.pos.x - ego_pos.x;
            let dy = actor.pos.y - ego_pos.y;
            if (dx * dx + dy * dy).sqrt() >= trigger.distance_m {
                continue;
            }
            self.pending[i] = false;
            let frame_id = world.frame_id;
            match trigger.action {
                TriggerAction::Stop => {
                    if let Some(a) = world.actor_by_id_mut(self.actor_ids[i]) {
                        a.speed = 0.0;
                    }
                }
                TriggerAction::SetSpeed { speed_mps } => {
                    if let Some(a) = world.actor_by_id_mut(self.actor_ids[i]) {
                        a.speed = speed_mps;
                    }
                }
                TriggerAction::SetHeading { heading_deg } => {
                    if let Some(a) = world.actor_by_id_mut(self.actor_ids[i]) {
                        a.heading = heading_deg.to_radians();
                    }
                }
                TriggerAction::EgoControl {
                    throttle,
                    brake,
                    steer,
                } => world.apply_controls(throttle, brake, steer),
            }
            self.outcome
                .lock()
                .expect("outcome lock")
                .fired
                .push(FiredTrigger {
                    actor_index: i,
                    frame_id,
                });
        }
        self.outcome.lock().expect("outcome lock").ticks_run = world.frame_id + 1;
    }

    /// Package as a service tick hook plus the shared outcome.
    pub fn into_hook(mut self) -> (TickHook, Arc<Mutex<ScenarioOutcome>>) {
        let outcome = self.outcome_handle();
        let hook: TickHook = Box::new(move |world| self.before_tick(world));
        (hook, outcome)
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "name",
    "duration_ticks",
    "weather",
    "ego",
    "actors",
    "exclusive_cast",
];
const EGO_KEYS: &[&str] = &["x", "y", "heading_deg", "throttle", "brake", "steer"];
const ACTOR_KEYS: &[&str] = &["class", "x", "y", "heading_deg", "speed_mps", "trigger"];
const TRIGGER_KEYS: &[&str] = &["distance_m", "action"];
const ACTION_KEYS: &[&str] = &[
    "kind",
    "speed_mps",
    "heading_deg",
    "throttle",
    "brake",
    "steer",
];
const ACTION_KINDS: &[&str] = &["stop", "set_speed", "set_heading", "ego_control"];

fn weather_names() -> Vec<&'static str> {
    WeatherPreset::ALL.iter().map(|p| p.name()).collect()
}

fn read_scenario(v: &mut Validator, value: &serde_yaml::Value) -> Option<Scenario> {
    let map = v.mapping(value, "scenario")?;
    v.check_unknown(map, "scenario", SCENARIO_KEYS);

    let name = v
        .require(map, "scenario", "name")
        .and_then(|val| v.string(val, "name"))
        .filter(|n| {
            if n.is_empty() {
                v.push(Issue::RangeViolation {
                    path: "name".into(),
                    value: "\"\"".into(),
                    bound: "non-empty string".into(),
                });
                false
            } else {
                true
            }
        });

    let duration = v
        .require(map, "scenario", "duration_ticks")
        .and_then(|val| v.u64_in(val, "duration_ticks", 1, 1_000_000));

    let weather = v
        .opt_one_of(map, "", "weather", &weather_names())
        .and_then(|n| WeatherPreset::from_name(&n));

    let ego = match v.get(map, "ego") {
        Some(val) => read_ego(v, val),
        None => Some(EgoSpec::default()),
    };

    let exclusive_cast = v.opt_bool(map, "", "exclusive_cast").unwrap_or(true);

    let mut actors = Vec::new();
    let mut actors_ok = true;
    if let Some(val) = v.get(map, "actors") {
        match v.sequence(val, "actors") {
            Some(seq) => {
                for (i, item) in seq.iter().enumerate() {
                    match read_actor(v, item, &yamlv::index("actors", i)) {
                        Some(spec) => actors.push(spec),
                        None => actors_ok = false,
                    }
                }
            }
            None => actors_ok = false,
        }
    }

    match (name, duration, ego, actors_ok) {
        (Some(name), Some(duration_ticks), Some(ego), true) => Some(Scenario {
            name,
            duration_ticks,
            weather,
            ego,
            actors,
            exclusive_cast,
        }),
        _ => None,
    }
}

fn read_ego(v: &mut Validator, value: &serde_yaml::Value) -> Option<EgoSpec> {
    let map = v.mapping(value, "ego")?;
    v.check_unknown(map, "ego", EGO_KEYS);
    let d = EgoSpec::default();
    Some(EgoSpec {
        x: v.opt_f64_in(map, "ego", "x", -120.0, 120.0).unwrap_or(d.x),
        y: v.opt_f64_in(map, "ego", "y", -50.0, 50.0).unwrap_or(d.y),
        heading_deg: v
            .opt_f64_in(map, "ego", "heading_deg", -360.0, 360.0)
            .unwrap_or(d.heading_deg),
        throttle: v
            .opt_f64_in(map, "ego", "throttle", 0.0, 1.0)
            .unwrap_or(d.throttle),
        brake: v
            .opt_f64_in(map, "ego", "brake", 0.0, 1.0)
            .unwrap_or(d.brake),
        steer: v
            .opt_f64_in(map, "ego", "steer", -1.0, 1.0)
            .unwrap_or(d.steer),
    })
}

fn read_actor(v: &mut Validator, value: &serde_yaml::Value, path: &str) -> Option<ActorSpec> {
    let map = v.mapping(value, path)?;
    v.check_unknown(map, path, ACTOR_KEYS);

    let class_name = v
        .require(map, path, "class")
        .and_then(|val| v.one_of(val, &yamlv::child(path, "class"), &class_names()));
    let x = v
        .require(map, path, "x")
        .and_then(|val| v.f64_in(val, &yamlv::child(path, "x"), -120.0, 120.0));
    let y = v
        .require(map, path, "y")
        .and_then(|val| v.f64_in(val, &yamlv::child(path, "y"), -50.0, 50.0));
    let heading_deg = v
        .opt_f64_in(map, path, "heading_deg", -360.0, 360.0)
        .unwrap_or(0.0);
    let speed_mps = v.opt_f64_in(map, path, "speed_mps", 0.0, 50.0).unwrap_or(0.0);

    let trigger = match v.get(map, "trigger") {
        Some(val) => Some(read_trigger(v, val, &yamlv::child(path, "trigger"))?),
        None => None,
    };

    let class_name = class_name?;
    let class = class_by_name(&class_name)?;
    Some(ActorSpec {
        class_name,
        class,
        x: x?,
        y: y?,
        heading_deg,
        speed_mps,
        trigger,
    })
}

fn read_trigger(v: &mut Validator, value: &serde_yaml::Value, path: &str) -> Option<Trigger> {
    let map = v.mapping(value, path)?;
    v.check_unknown(map, path, TRIGGER_KEYS);
    let distance_m = v
        .require(map, path, "distance_m")
        .and_then(|val| v.f64_in(val, &yamlv::child(path, "distance_m"), 0.01, 1000.0));
    let action = v
        .require(map, path, "action")
        .and_then(|val| read_action(v, val, &yamlv::child(path, "action")));
    Some(Trigger {
        distance_m: distance_m?,
        action: action?,
    })
}

fn read_action(
    v: &mut Validator,
    value: &serde_yaml::Value,
    path: &str,
) -> Option<TriggerAction> {
    let map = v.mapping(value, path)?;
    v.check_unknown(map, path, ACTION_KEYS);
    let kind = v
        .require(map, path, "kind")
        .and_then(|val| v.one_of(val, &yamlv::child(path, "kind"), ACTION_KINDS))?;
    match kind.as_str() {
        "stop" => Some(TriggerAction::Stop),
        "set_speed" => {
            let speed = v
                .require(map, path, "speed_mps")
                .and_then(|val| v.f64_in(val, &yamlv::child(path, "speed_mps"), 0.0, 50.0))?;
            Some(TriggerAction::SetSpeed { speed_mps: speed })
        }
        "set_heading" => {
            let heading = v
                .require(map, path, "heading_deg")
                .and_then(|val| v.f64_in(val, &yamlv::child(path, "heading_deg"), -360.0, 360.0))?;
            Some(TriggerAction::SetHeading {
                heading_deg: heading,
            })
        }
        "ego_control" => {
            let throttle = v
                .opt_f64_in(map, path, "throttle", 0.0, 1.0)
                .unwrap_or(0.0);
            let brake = v.opt_f64_in(map, path, "brake", 0.0, 1.0).unwrap_or(0.0);
            let steer = v.opt_f64_in(map, path, "steer", -1.0, 1.0).unwrap_or(0.0);
            Some(TriggerAction::EgoControl {
                throttle,
                brake,
                steer,
            })
        }
        _ => None,
    }
}
