//! World state and deterministic evolution.
//!
//! The map is a straight two-lane road along +x with sidewalks, buildings,
//! street furniture and procedurally placed traffic. All placement comes
//! from one seeded generator at construction; per-tick evolution is pure
//! arithmetic, so identical seeds and controls give identical worlds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use g2r_core::semantic::class_id;
use g2r_core::VehicleStatus;

use crate::math::Vec3;
use crate::weather::WeatherPreset;

/// Longitudinal extent of the world; actors wrap modulo this span so the
/// scene stays populated on long runs.
pub const ROAD_SPAN: f64 = 240.0;

/// Acceleration applied at full throttle, m/s^2.
pub const THROTTLE_ACCEL: f64 = 3.0;
/// Deceleration applied at full brake, m/s^2.
pub const BRAKE_DECEL: f64 = 6.0;
/// Ego speed ceiling, m/s.
pub const MAX_SPEED: f64 = 30.0;
/// Yaw rate per unit steer, rad/s.
pub const STEER_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TownProfile {
    /// Dense frontage, more traffic.
    Compact,
    /// Sparser blocks, longer sight lines.
    Sprawl,
}

impl TownProfile {
    pub fn name(self) -> &'static str {
        match self {
            TownProfile::Compact => "compact",
            TownProfile::Sprawl => "sprawl",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "compact" => Some(TownProfile::Compact),
            "sprawl" => Some(TownProfile::Sprawl),
            _ => None,
        }
    }
}

/// Ego control inputs, clamped to their valid ranges on application.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Controls {
    pub throttle: f64,
    pub brake: f64,
    pub steer: f64,
}

/// How an actor occupies space and moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActorShape {
    /// Yawed box, half extents in meters.
    Box { half: Vec3 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    /// Stable nonzero id; 0 is reserved for ground and sky.
    pub id: u64,
    pub class: u8,
    /// Ground-contact position; the volume sits on top of it.
    pub pos: Vec3,
    pub heading: f64,
    pub speed: f64,
    pub shape: ActorShape,
    /// Moving actors wrap along x; scenery stays put.
    pub mobile: bool,
}

impl Actor {
    pub fn half_extents(&self) -> Vec3 {
        match self.shape {
            ActorShape::Box { half } => half,
        }
    }

    /// Center of the collision volume.
    pub fn center(&self) -> Vec3 {
        let half = self.half_extents();
        Vec3::new(self.pos.x, self.pos.y, self.pos.z + half.z)
    }

    pub fn bounding_radius(&self) -> f64 {
        self.half_extents().length()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub fixed_dt: f64,
    pub weather: WeatherPreset,
    pub town_profile: TownProfile,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            seed: 0,
            width: 960,
            height: 540,
            fixed_dt: 0.05,
            weather: WeatherPreset::ClearNoon,
            town_profile: TownProfile::Compact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub config: WorldConfig,
    pub frame_id: u64,
    pub ego: Actor,
    pub controls: Controls,
    pub actors: Vec<Actor>,
}

fn wrap_x(x: f64) -> f64 {
    // Keep positions in [-ROAD_SPAN/2, ROAD_SPAN/2).
    let half = ROAD_SPAN / 2.0;
    ((x + half).rem_euclid(ROAD_SPAN)) - half
}

pub(crate) fn vehicle_half(class: u8) -> Vec3 {
    match class {
        class_id::CAR => Vec3::new(2.2, 0.95, 0.75),
        class_id::TRUCK => Vec3::new(4.2, 1.25, 1.6),
        class_id::BUS => Vec3::new(5.5, 1.3, 1.5),
        class_id::MOTORCYCLE => Vec3::new(1.1, 0.45, 0.65),
        class_id::BICYCLE => Vec3::new(0.9, 0.4, 0.6),
        _ => Vec3::new(2.0, 1.0, 0.8),
    }
}

impl World {
    pub fn new(config: WorldConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut actors = Vec::new();
        let mut next_id = 2u64; // 1 is the ego

        let (vehicle_n, building_gap, tree_n, walker_n) = match config.town_profile {
            TownProfile::Compact => (10, 16.0, 14, 8),
            TownProfile::Sprawl => (6, 28.0, 22, 4),
        };

        // Buildings line both frontages beyond the sidewalks.
        let mut x = -ROAD_SPAN / 2.0 + 6.0;
        while x < ROAD_SPAN / 2.0 - 6.0 {
            for side in [-1.0, 1.0] {
                let depth = rng.gen_range(4.0..9.0);
                let width = rng.gen_range(5.0..building_gap * 0.7);
                let height = rng.gen_range(6.0..18.0);
                let y = side * (8.5 + depth);
                actors.push(Actor {
                    id: next_id,
                    class: class_id::BUILDING,
                    pos: Vec3::new(x + rng.gen_range(-2.0..2.0), y, 0.0),
                    heading: 0.0,
                    speed: 0.0,
                    shape: ActorShape::Box {
                        half: Vec3::new(width / 2.0, depth, height / 2.0),
                    },
                    mobile: false,
                });
                next_id += 1;
            }
            x += building_gap;
        }

        // Street furniture: poles with lights or signs, alternating sides.
        let mut x = -ROAD_SPAN / 2.0 + 10.0;
        let mut pole_flip = false;
        while x < ROAD_SPAN / 2.0 - 10.0 {
            let side = if pole_flip { 1.0 } else { -1.0 };
            pole_flip = !pole_flip;
            actors.push(Actor {
                id: next_id,
                class: class_id::POLE,
                pos: Vec3::new(x, side * 6.8, 0.0),
                heading: 0.0,
                speed: 0.0,
                shape: ActorShape::Box {
                    half: Vec3::new(0.12, 0.12, 2.6),
                },
                mobile: false,
            });
            next_id += 1;
            let head_class = if rng.gen_bool(0.5) {
                class_id::TRAFFIC_LIGHT
            } else {
                class_id::TRAFFIC_SIGN
            };
            actors.push(Actor {
                id: next_id,
                class: head_class,
                pos: Vec3::new(x, side * 6.8, 5.2),
                heading: 0.0,
                speed: 0.0,
                shape: ActorShape::Box {
                    half: Vec3::new(0.35, 0.35, 0.55),
                },
                mobile: false,
            });
            next_id += 1;
            x += 24.0;
        }

        // Vegetation blobs behind the sidewalks.
        for _ in 0..tree_n {
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let size = rng.gen_range(1.2..2.8);
            actors.push(Actor {
                id: next_id,
                class: class_id::VEGETATION,
                pos: Vec3::new(
                    rng.gen_range(-ROAD_SPAN / 2.0..ROAD_SPAN / 2.0),
                    side * rng.gen_range(6.6..7.8),
                    0.0,
                ),
                heading: rng.gen_range(0.0..std::f64::consts::TAU),
                speed: 0.0,
                shape: ActorShape::Box {
                    half: Vec3::new(size, size, rng.gen_range(1.5..4.0)),
                },
                mobile: false,
            });
            next_id += 1;
        }

        // Traffic: one vehicle class guaranteed each, the rest drawn.
        let vehicle_classes = [
            class_id::CAR,
            class_id::TRUCK,
            class_id::BUS,
            class_id::MOTORCYCLE,
            class_id::BICYCLE,
        ];
        for i in 0..vehicle_n {
            let class = if i < vehicle_classes.len() {
                vehicle_classes[i]
            } else {
                vehicle_classes[rng.gen_range(0..vehicle_classes.len())]
            };
            let oncoming = rng.gen_bool(0.5);
            let lane_y = if oncoming { 2.0 } else { -2.0 };
            let heading = if oncoming { std::f64::consts::PI } else { 0.0 };
            actors.push(Actor {
                id: next_id,
                class,
                pos: Vec3::new(
                    rng.gen_range(-ROAD_SPAN / 2.0..ROAD_SPAN / 2.0),
                    lane_y + rng.gen_range(-0.3..0.3),
                    0.0,
                ),
                heading,
                speed: rng.gen_range(2.0..9.0),
                shape: ActorShape::Box {
                    half: vehicle_half(class),
                },
                mobile: true,
            });
            next_id += 1;
        }

        // Pedestrians and riders on the sidewalks.
        for i in 0..walker_n {
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let class = if i % 3 == 2 {
                class_id::RIDER
            } else {
                class_id::PEDESTRIAN
            };
            let heading = if rng.gen_bool(0.5) {
                0.0
            } else {
                std::f64::consts::PI
            };
            actors.push(Actor {
                id: next_id,
                class,
                pos: Vec3::new(
                    rng.gen_range(-ROAD_SPAN / 2.0..ROAD_SPAN / 2.0),
                    side * rng.gen_range(4.3..5.7),
                    0.0,
                ),
                heading,
                speed: if class == class_id::RIDER {
                    rng.gen_range(2.0..4.0)
                } else {
                    rng.gen_range(0.6..1.6)
                },
                shape: ActorShape::Box {
                    half: if class == class_id::RIDER {
                        Vec3::new(0.9, 0.4, 0.85)
                    } else {
                        Vec3::new(0.25, 0.25, 0.85)
                    },
                },
                mobile: true,
            });
            next_id += 1;
        }

        let ego = Actor {
            id: 1,
            class: class_id::CAR,
            pos: Vec3::new(-ROAD_SPAN / 2.0 + 20.0, -2.0, 0.0),
            heading: 0.0,
            speed: 0.0,
            shape: ActorShape::Box {
                half: vehicle_half(class_id::CAR),
            },
            mobile: true,
        };

        World {
            config,
            frame_id: 0,
            ego,
            controls: Controls::default(),
            actors,
        }
    }

    /// Apply a control command; takes effect on the next tick.
    pub fn apply_controls(&mut self, throttle: f64, brake: f64, steer: f64) {
        self.controls = Controls {
            throttle: throttle.clamp(0.0, 1.0),
            brake: brake.clamp(0.0, 1.0),
            steer: steer.clamp(-1.0, 1.0),
        };
    }

    /// Advance one fixed step. Position integrates the pre-update speed, so
    /// one full-throttle tick from rest moves nothing but leaves the ego at
    /// `THROTTLE_ACCEL * dt` m/s.
    pub fn tick(&mut self) {
        let dt = self.config.fixed_dt;

        let (sin, cos) = self.ego.heading.sin_cos();
        self.ego.pos.x = wrap_x(self.ego.pos.x + self.ego.speed * cos * dt);
        self.ego.pos.y += self.ego.speed * sin * dt;
        let accel = self.controls.throttle * THROTTLE_ACCEL - self.controls.brake * BRAKE_DECEL;
        self.ego.speed = (self.ego.speed + accel * dt).clamp(0.0, MAX_SPEED);
        self.ego.heading += self.controls.steer * STEER_RATE * dt;

        for actor in &mut self.actors {
            if !actor.mobile {
                continue;
            }
            let (sin, cos) = actor.heading.sin_cos();
            actor.pos.x = wrap_x(actor.pos.x + actor.speed * cos * dt);
            actor.pos.y += actor.speed * sin * dt;
        }

        self.frame_id += 1;
    }

    pub fn vehicle_status(&self) -> VehicleStatus {
        VehicleStatus {
            steer: self.controls.steer as f32,
            throttle: self.controls.throttle as f32,
            brake: self.controls.brake as f32,
            speed_mps: self.ego.speed as f32,
        }
    }

    /// Camera mount: above the ego, looking along its heading.
    pub fn camera_pose(&self) -> (Vec3, f64) {
        let eye = Vec3::new(self.ego.pos.x, self.ego.pos.y, 1.6);
        (eye, self.ego.heading)
    }

    pub fn actor_by_id(&self, id: u64) -> Option<&Actor> {
        if id == 1 {
            return Some(&self.ego);
        }
        self.actors.iter().find(|a| a.id == id)
    }

    pub fn actor_by_id_mut(&mut self, id: u64) -> Option<&mut Actor> {
        if id == 1 {
            return Some(&mut self.ego);
        }
        self.actors.iter_mut().find(|a| a.id == id)
    }
}
