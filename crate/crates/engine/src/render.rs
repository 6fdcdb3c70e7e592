//! Deferred-style sensor rendering: one ray per pixel against the world's
//! boxes and the ground plane, exact z-buffering, per-class materials.

use std::collections::BTreeMap;

use g2r_core::semantic::class_id;
use g2r_core::{CoreError, GBufferId, GBufferSet, ImagePlane, Precision, SemanticMap};

use crate::math::Vec3;
use crate::world::{World, MAX_SPEED};

/// Horizontal field of view; the vertical one follows the aspect ratio.
pub const FOV_TAN_HALF_H: f64 = 1.0;
/// Far clip in meters; ground beyond it renders as sky.
pub const FAR_PLANE: f64 = 300.0;

/// Everything one render pass produces.
#[derive(Debug, Clone)]
pub struct RenderOutput {
    /// Tone-mapped color, 8-bit quantized so wire transfer is lossless.
    pub rgb: ImagePlane,
    pub gbuffers: GBufferSet,
    pub semantics: SemanticMap,
    /// Per-pixel actor ids; 0 for ground and sky.
    pub actor_ids: Vec<u64>,
}

struct Material {
    albedo: [f32; 3],
    metallic: f32,
    specular: f32,
    roughness: f32,
}

fn material_for(class: u8) -> Material {
    let m = |albedo, metallic, specular, roughness| Material {
        albedo,
        metallic,
        specular,
        roughness,
    };
    match class {
        class_id::ROAD => m([0.30, 0.30, 0.32], 0.0, 0.18, 0.85),
        class_id::ROAD_LINE => m([0.85, 0.82, 0.75], 0.0, 0.25, 0.60),
        class_id::SIDEWALK => m([0.48, 0.46, 0.44], 0.0, 0.12, 0.90),
        class_id::TERRAIN => m([0.35, 0.42, 0.28], 0.0, 0.05, 1.00),
        class_id::BUILDING => m([0.58, 0.50, 0.42], 0.05, 0.20, 0.80),
        class_id::POLE => m([0.35, 0.36, 0.38], 0.60, 0.50, 0.45),
        class_id::TRAFFIC_LIGHT => m([0.20, 0.55, 0.25], 0.30, 0.50, 0.40),
        class_id::TRAFFIC_SIGN => m([0.75, 0.70, 0.30], 0.30, 0.55, 0.35),
        class_id::VEGETATION => m([0.18, 0.45, 0.15], 0.0, 0.08, 0.95),
        class_id::PEDESTRIAN => m([0.60, 0.45, 0.40], 0.0, 0.15, 0.90),
        class_id::RIDER => m([0.50, 0.30, 0.30], 0.10, 0.25, 0.70),
        class_id::CAR => m([0.55, 0.15, 0.15], 0.85, 0.90, 0.25),
        class_id::TRUCK => m([0.25, 0.35, 0.60], 0.80, 0.85, 0.30),
        class_id::BUS => m([0.80, 0.55, 0.15], 0.80, 0.85, 0.30),
        class_id::MOTORCYCLE => m([0.20, 0.20, 0.25], 0.90, 0.90, 0.20),
        class_id::BICYCLE => m([0.30, 0.50, 0.50], 0.70, 0.70, 0.35),
        _ => m([0.50, 0.50, 0.50], 0.0, 0.20, 0.80),
    }
}

fn is_ground_class(class: u8) -> bool {
    matches!(
        class,
        class_id::ROAD | class_id::ROAD_LINE | class_id::SIDEWALK | class_id::TERRAIN
    )
}

fn is_vehicle_class(class: u8) -> bool {
    matches!(
        class,
        class_id::CAR
            | class_id::TRUCK
            | class_id::BUS
            | class_id::TRAIN
            | class_id::MOTORCYCLE
            | class_id::BICYCLE
    )
}

/// Foliage / clear-coat payload: carries signal only for vegetation and
/// vehicles, zero elsewhere. The stacking policy depends on this.
fn gbuffer_d_payload(class: u8, tint: f32) -> [f32; 3] {
    if class == class_id::VEGETATION {
        [0.35, 0.65, 0.20 * tint]
    } else if is_vehicle_class(class) {
        [0.80, 0.15 + 0.1 * tint, 0.55]
    } else {
        [0.0, 0.0, 0.0]
    }
}

/// SplitMix64; stable per-actor tint without touching the world RNG.
fn actor_tint(id: u64) -> f32 {
    let mut z = id.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    0.85 + 0.15 * ((z % 1000) as f32 / 1000.0)
}

/// Ground classification by lateral position; the dashed center line sits
/// on the road surface.
pub fn ground_class(x: f64, y: f64) -> u8 {
    let lateral = y.abs();
    if lateral <= 4.25 {
        // Dash period of 4 m divides ROAD_SPAN, so wrapping stays seamless.
        if lateral < 0.18 && x.rem_euclid(4.0) < 2.4 {
            class_id::ROAD_LINE
        } else {
            class_id::ROAD
        }
    } else if lateral <= 6.0 {
        class_id::SIDEWALK
    } else {
        class_id::TERRAIN
    }
}

/// Per-frame actor snapshot with precomputed trig and culling data.
struct BoxGeom {
    id: u64,
    class: u8,
    center: Vec3,
    half: Vec3,
    sin: f64,
    cos: f64,
    radius: f64,
    speed: f64,
    heading: f64,
}

fn slab_hit(g: &BoxGeom, origin: Vec3, dir: Vec3) -> Option<(f64, Vec3)> {
    // Broad phase: bounding sphere.
    let oc = g.center - origin;
    let proj = oc.dot(dir);
    if proj < -g.radius {
        return None;
    }
    if oc.dot(oc) - proj * proj > g.radius * g.radius {
        return None;
    }

    let rel = origin - g.center;
    let o = Vec3::new(
        rel.x * g.cos + rel.y * g.sin,
        -rel.x * g.sin + rel.y * g.cos,
        rel.z,
    );
    let d = Vec3::new(
        dir.x * g.cos + dir.y * g.sin,
        -dir.x * g.sin + dir.y * g.cos,
        dir.z,
    );

    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut axis = 0usize;
    let mut sign = 0.0f64;
    let axes = [(o.x, d.x, g.half.x), (o.y, d.y, g.half.y), (o.z, d.z, g.half.z)];
    for (i, &(oc, dc, hc)) in axes.iter().enumerate() {
        if dc.abs() < 1e-12 {
            if oc.abs() > hc {
                return None;
            }
            continue;
        }
        let inv = 1.0 / dc;
        let mut t0 = (-hc - oc) * inv;
        let mut t1 = (hc - oc) * inv;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_enter {
            t_enter = t0;
            axis = i;
            sign = -dc.signum();
        }
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    if t_enter <= 1e-9 || !t_enter.is_finite() {
        return None;
    }
    let ln = match axis {
        0 => Vec3::new(sign, 0.0, 0.0),
        1 => Vec3::new(0.0, sign, 0.0),
        _ => Vec3::new(0.0, 0.0, sign),
    };
    Some((
        t_enter,
        Vec3::new(
            ln.x * g.cos - ln.y * g.sin,
            ln.x * g.sin + ln.y * g.cos,
            ln.z,
        ),
    ))
}

struct Hit {
    t: f64,
    class: u8,
    actor_id: u64,
    normal: Vec3,
    point: Vec3,
    speed: f64,
    heading: f64,
}

/// Render every sensor for the current world state. The ego body is
/// excluded: the camera rides it. With `include_exotic` the velocity and
/// E/F payload buffers are also produced; no stacking policy may consume
/// them, but the wire can carry them.
pub fn render_sensors(world: &World, include_exotic: bool) -> Result<RenderOutput, CoreError> {
    let w = world.config.width;
    let h = world.config.height;
    let wp = world.config.weather.params();
    let sun = wp.sun_dir.normalized();

    let (eye, yaw) = world.camera_pose();
    let (sin_yaw, cos_yaw) = yaw.sin_cos();
    let forward = Vec3::new(cos_yaw, sin_yaw, 0.0);
    let right = Vec3::new(sin_yaw, -cos_yaw, 0.0);
    let up = Vec3::new(0.0, 0.0, 1.0);

    let tan_half_h = FOV_TAN_HALF_H;
    let tan_half_v = tan_half_h * h as f64 / w as f64;

    // Frame-level cull: drop actors entirely behind the camera or beyond
    // the far plane.
    let geoms: Vec<BoxGeom> = world
        .actors
        .iter()
        .filter_map(|a| {
            let center = a.center();
            let radius = a.bounding_radius();
            let rel = center - eye;
            if rel.dot(forward) < -radius {
                return None;
            }
            // Cull in view depth, the same metric the far clip uses, so a
            // culled actor is one every pixel would clip anyway.
            if rel.dot(forward) - radius > FAR_PLANE {
                return None;
            }
            let (sin, cos) = a.heading.sin_cos();
            Some(BoxGeom {
                id: a.id,
                class: a.class,
                center,
                half: a.half_extents(),
                sin,
                cos,
                radius,
                speed: a.speed,
                heading: a.heading,
            })
        })
        .collect();

    let pixels = w as usize * h as usize;
    let mut rgb8 = vec![0u8; pixels * 3];
    let mut scene_color = vec![0.0f32; pixels * 3];
    let mut albedo_buf = vec![0.0f32; pixels * 3];
    let mut gbuffer_d = vec![0.0f32; pixels * 3];
    let mut ssao = vec![0.0f32; pixels];
    let mut normals = vec![0.0f32; pixels * 3];
    let mut depth = vec![0.0f32; pixels];
    let mut metallic = vec![0.0f32; pixels];
    let mut specular = vec![0.0f32; pixels];
    let mut roughness = vec![0.0f32; pixels];
    let mut stencil8 = vec![0u8; pixels];
    let mut classes = vec![0u8; pixels];
    let mut actor_ids = vec![0u64; pixels];
    let mut velocity = if include_exotic {
        vec![0.5f32; pixels * 2]
    } else {
        Vec::new()
    };
    let mut payload_e = if include_exotic {
        vec![0.0f32; pixels * 3]
    } else {
        Vec::new()
    };
    let mut payload_f = if include_exotic {
        vec![0.0f32; pixels * 3]
    } else {
        Vec::new()
    };

    for py in 0..h as usize {
        let ndc_y = 1.0 - (py as f64 + 0.5) / h as f64 * 2.0;
        for px in 0..w as usize {
            let ndc_x = (px as f64 + 0.5) / w as f64 * 2.0 - 1.0;
            let dir = (right * (ndc_x * tan_half_h) + up * (ndc_y * tan_half_v) + forward)
                .normalized();
            let cos_to_forward = dir.dot(forward);

            // Nearest box hit.
            let mut best: Option<Hit> = None;
            for g in &geoms {
                if let Some((t, normal)) = slab_hit(g, eye, dir) {
                    if best.as_ref().map_or(true, |b| t < b.t) {
                        best = Some(Hit {
                            t,
                            class: g.class,
                            actor_id: g.id,
                            normal,
                            point: eye + dir * t,
                            speed: g.speed,
                            heading: g.heading,
                        });
                    }
                }
            }

            // Ground plane z = 0.
            if dir.z < -1e-9 {
                let t = -eye.z / dir.z;
                if best.as_ref().map_or(true, |b| t < b.t) {
                    let point = eye + dir * t;
                    best = Some(Hit {
                        t,
                        class: ground_class(point.x, point.y),
                        actor_id: 0,
                        normal: Vec3::new(0.0, 0.0, 1.0),
                        point,
                        speed: 0.0,
                        heading: 0.0,
                    });
                }
            }

            // Far clip: anything past the plane renders as sky.
            if let Some(hit) = &best {
                if hit.t * cos_to_forward >= FAR_PLANE {
                    best = None;
                }
            }

            let pix = py * w as usize + px;
            match best {
                None => {
                    classes[pix] = class_id::SKY;
                    stencil8[pix] = class_id::SKY;
                    depth[pix] = 1.0;
                    ssao[pix] = 1.0;
                    roughness[pix] = 1.0;
                    for c in 0..3 {
                        scene_color[pix * 3 + c] = wp.sky_color[c];
                        normals[pix * 3 + c] = 0.5;
                        rgb8[pix * 3 + c] =
                            (wp.sky_color[c].powf(1.0 / 2.2) * 255.0).round() as u8;
                    }
                }
                Some(hit) => {
                    let mat = material_for(hit.class);
                    let tint = if hit.actor_id == 0 {
                        1.0
                    } else {
                        actor_tint(hit.actor_id)
                    };
                    let ground = is_ground_class(hit.class);
                    let albedo_scale = if ground { wp.road_albedo_scale } else { 1.0 } * tint;
                    let light = (wp.ambient
                        + wp.sun_intensity * hit.normal.dot(sun).max(0.0) as f32)
                        .min(1.0);

                    classes[pix] = hit.class;
                    stencil8[pix] = hit.class;
                    actor_ids[pix] = hit.actor_id;
                    let z = hit.t * cos_to_forward;
                    depth[pix] = ((z / FAR_PLANE) as f32).clamp(0.0, 1.0).min(0.999_99);
                    ssao[pix] = 1.0 - 0.35 * (-(z / 8.0)).exp() as f32;
                    metallic[pix] = mat.metallic;
                    specular[pix] = if ground {
                        (mat.specular * wp.specular_boost).min(1.0)
                    } else {
                        mat.specular
                    };
                    roughness[pix] = if ground {
                        mat.roughness * (1.0 - 0.5 * wp.wetness)
                    } else {
                        mat.roughness
                    };

                    let d_payload = gbuffer_d_payload(hit.class, tint);
                    for c in 0..3 {
                        let albedo = (mat.albedo[c] * albedo_scale).clamp(0.0, 1.0);
                        let lit = (albedo * light).clamp(0.0, 1.0);
                        albedo_buf[pix * 3 + c] = albedo;
                        scene_color[pix * 3 + c] = lit;
                        rgb8[pix * 3 + c] = (lit.powf(1.0 / 2.2) * 255.0).round() as u8;
                        gbuffer_d[pix * 3 + c] = d_payload[c];
                        normals[pix * 3 + c] = (match c {
                            0 => hit.normal.x,
                            1 => hit.normal.y,
                            _ => hit.normal.z,
                        } as f32
                            + 1.0)
                            / 2.0;
                    }

                    if include_exotic {
                        let speed_frac = (hit.speed / MAX_SPEED).clamp(0.0, 1.0);
                        velocity[pix * 2] =
                            (0.5 + 0.4 * speed_frac * hit.heading.cos()) as f32;
                        velocity[pix * 2 + 1] =
                            (0.5 + 0.4 * speed_frac * hit.heading.sin()) as f32;
                        payload_e[pix * 3] = (hit.point.x / 10.0).rem_euclid(1.0) as f32;
                        payload_e[pix * 3 + 1] = (hit.point.y / 10.0).rem_euclid(1.0) as f32;
                        payload_e[pix * 3 + 2] = (hit.point.z / 10.0).rem_euclid(1.0) as f32;
                        for c in 0..3 {
                            payload_f[pix * 3 + c] = (1.0 - albedo_buf[pix * 3 + c]) * 0.5;
                        }
                    }
                }
            }
        }
    }

    let mut buffers = BTreeMap::new();
    buffers.insert(
        GBufferId::SceneColor,
        ImagePlane::new(w, h, 3, Precision::F32, scene_color)?,
    );
    buffers.insert(
        GBufferId::SceneDepth,
        ImagePlane::new(w, h, 1, Precision::F32, depth)?,
    );
    buffers.insert(
        GBufferId::Albedo,
        ImagePlane::new(w, h, 3, Precision::F32, albedo_buf)?,
    );
    buffers.insert(
        GBufferId::GBufferD,
        ImagePlane::new(w, h, 3, Precision::F32, gbuffer_d)?,
    );
    buffers.insert(GBufferId::Ssao, ImagePlane::new(w, h, 1, Precision::F32, ssao)?);
    buffers.insert(
        GBufferId::Normals,
        ImagePlane::new(w, h, 3, Precision::F32, normals)?,
    );
    buffers.insert(
        GBufferId::Metallic,
        ImagePlane::new(w, h, 1, Precision::F32, metallic)?,
    );
    buffers.insert(
        GBufferId::Specular,
        ImagePlane::new(w, h, 1, Precision::F32, specular)?,
    );
    buffers.insert(
        GBufferId::Roughness,
        ImagePlane::new(w, h, 1, Precision::F32, roughness)?,
    );
    buffers.insert(
        GBufferId::CustomStencil,
        ImagePlane::from_u8(w, h, 1, &stencil8)?,
    );
    if include_exotic {
        buffers.insert(
            GBufferId::Velocity,
            ImagePlane::new(w, h, 2, Precision::F32, velocity)?,
        );
        buffers.insert(
            GBufferId::GBufferE,
            ImagePlane::new(w, h, 3, Precision::F32, payload_e)?,
        );
        buffers.insert(
            GBufferId::GBufferF,
            ImagePlane::new(w, h, 3, Precision::F32, payload_f)?,
        );
    }

    Ok(RenderOutput {
        rgb: ImagePlane::from_u8(w, h, 3, &rgb8)?,
        gbuffers: GBufferSet::new(world.frame_id, buffers)?,
        semantics: SemanticMap::new(w, h, classes)?,
        actor_ids,
    })
}
