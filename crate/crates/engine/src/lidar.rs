//! Semantic lidar: a deterministic sweep that reports range, class and
//! actor id per return. Misses (sky) produce no record.

use g2r_core::{LidarPoint, LidarScan};

use crate::math::{ray_box, ray_misses_sphere, Vec3};
use crate::render::ground_class;
use crate::world::World;

/// Sensor mount height above the ego's ground contact.
const MOUNT_HEIGHT: f64 = 2.0;
/// Maximum range in meters.
pub const LIDAR_RANGE: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarConfig {
    /// Rays per horizontal revolution.
    pub azimuth_steps: u32,
    /// Vertical scan lines.
    pub elevation_steps: u32,
    /// Lowest beam angle in radians (negative looks down).
    pub elevation_min: f64,
    /// Highest beam angle in radians.
    pub elevation_max: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        LidarConfig {
            azimuth_steps: 240,
            elevation_steps: 12,
            elevation_min: -0.35,
            elevation_max: 0.05,
        }
    }
}

/// Sweep the world. Azimuth 0 points along the ego heading and grows
/// counterclockwise; elevation scans bottom-up.
pub fn sweep(world: &World, config: &LidarConfig) -> LidarScan {
    let origin = Vec3::new(world.ego.pos.x, world.ego.pos.y, MOUNT_HEIGHT);
    let base_yaw = world.ego.heading;
    let mut points = Vec::new();

    for ei in 0..config.elevation_steps {
        let elevation = if config.elevation_steps == 1 {
            config.elevation_min
        } else {
            config.elevation_min
                + (config.elevation_max - config.elevation_min) * ei as f64
                    / (config.elevation_steps - 1) as f64
        };
        let (sin_el, cos_el) = elevation.sin_cos();
        for ai in 0..config.azimuth_steps {
            let azimuth = std::f64::consts::TAU * ai as f64 / config.azimuth_steps as f64;
            let yaw = base_yaw + azimuth;
            let (sin_az, cos_az) = yaw.sin_cos();
            let dir = Vec3::new(cos_az * cos_el, sin_az * cos_el, sin_el);

            let mut best_t = f64::INFINITY;
            let mut best_class = 0u8;
            let mut best_actor = 0u64;

            for actor in &world.actors {
                let center = actor.center();
                let radius = actor.bounding_radius();
                if ray_misses_sphere(origin, dir, center, radius) {
                    continue;
                }
                if let Some((t, _)) =
                    ray_box(origin, dir, center, actor.half_extents(), actor.heading)
                {
                    if t < best_t {
                        best_t = t;
                        best_class = actor.class;
                        best_actor = actor.id;
                    }
                }
            }

            if dir.z < -1e-9 {
                let t = -origin.z / dir.z;
                if t < best_t {
                    let p = origin + dir * t;
                    best_t = t;
                    best_class = ground_class(p.x, p.y);
                    best_actor = 0;
                }
            }

            if best_t.is_finite() && best_t <= LIDAR_RANGE {
                points.push(LidarPoint {
                    azimuth: azimuth as f32,
                    elevation: elevation as f32,
                    range: best_t as f32,
                    class_id: best_class,
                    actor_id: best_actor,
                });
            }
        }
    }

    LidarScan {
        frame_id: world.frame_id,
        points,
    }
}
