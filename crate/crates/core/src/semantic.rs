//! Semantic label maps, the 29-class scheme, and its reduction to the
//! 12-channel one-hot grouping the enhancer consumes.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::gbuffer::GBufferId;
use crate::image::ImagePlane;

/// Number of raw semantic classes in the labeling scheme.
pub const CLASS_COUNT: usize = 29;

/// Number of groups after reduction.
pub const GROUP_COUNT: usize = 12;

/// Raw class ids, matching the simulator's tagging scheme.
pub mod class_id {
    pub const UNLABELED: u8 = 0;
    pub const ROAD: u8 = 1;
    pub const SIDEWALK: u8 = 2;
    pub const BUILDING: u8 = 3;
    pub const WALL: u8 = 4;
    pub const FENCE: u8 = 5;
    pub const POLE: u8 = 6;
    pub const TRAFFIC_LIGHT: u8 = 7;
    pub const TRAFFIC_SIGN: u8 = 8;
    pub const VEGETATION: u8 = 9;
    pub const TERRAIN: u8 = 10;
    pub const SKY: u8 = 11;
    pub const PEDESTRIAN: u8 = 12;
    pub const RIDER: u8 = 13;
    pub const CAR: u8 = 14;
    pub const TRUCK: u8 = 15;
    pub const BUS: u8 = 16;
    pub const TRAIN: u8 = 17;
    pub const MOTORCYCLE: u8 = 18;
    pub const BICYCLE: u8 = 19;
    pub const STATIC: u8 = 20;
    pub const DYNAMIC: u8 = 21;
    pub const OTHER: u8 = 22;
    pub const WATER: u8 = 23;
    pub const ROAD_LINE: u8 = 24;
    pub const GROUND: u8 = 25;
    pub const BRIDGE: u8 = 26;
    pub const RAIL_TRACK: u8 = 27;
    pub const GUARD_RAIL: u8 = 28;
}

/// Human-readable names for the raw classes, indexed by id.
pub const CLASS_NAMES: [&str; CLASS_COUNT] = [
    "unlabeled",
    "road",
    "sidewalk",
    "building",
    "wall",
    "fence",
    "pole",
    "traffic_light",
    "traffic_sign",
    "vegetation",
    "terrain",
    "sky",
    "pedestrian",
    "rider",
    "car",
    "truck",
    "bus",
    "train",
    "motorcycle",
    "bicycle",
    "static",
    "dynamic",
    "other",
    "water",
    "road_line",
    "ground",
    "bridge",
    "rail_track",
    "guard_rail",
];

/// Dense per-pixel class ids, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticMap {
    width: u32,
    height: u32,
    classes: Vec<u8>,
}

impl SemanticMap {
    pub fn new(width: u32, height: u32, classes: Vec<u8>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize;
        if classes.len() != expected {
            return Err(CoreError::DataLengthMismatch {
                expected,
                actual: classes.len(),
            });
        }
        if let Some(pixel) = classes.iter().position(|&c| c as usize >= CLASS_COUNT) {
            return Err(CoreError::OutOfRangeClassId {
                pixel,
                id: classes[pixel] as u32,
            });
        }
        Ok(Self {
            width,
            height,
            classes,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn class_at(&self, x: u32, y: u32) -> u8 {
        self.classes[y as usize * self.width as usize + x as usize]
    }
}

/// Decode a custom-stencil plane (class ids scaled by 1/255) into a label map.
///
/// The round trip u8 -> f32/255 -> *255 -> round is exact, so any sample not
/// within 1e-3 of an integer step means the plane never held class data.
pub fn stencil_to_semantic(plane: &ImagePlane) -> Result<SemanticMap, CoreError> {
    if plane.channels() != 1 {
        return Err(CoreError::ChannelMismatch {
            what: "custom stencil",
            expected: 1,
            actual: plane.channels(),
        });
    }
    let mut classes = Vec::with_capacity(plane.data().len());
    for (pixel, &value) in plane.data().iter().enumerate() {
        let scaled = value * 255.0;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-3 {
            return Err(CoreError::NonIntegralStencil { pixel, value });
        }
        if rounded as usize >= CLASS_COUNT {
            return Err(CoreError::OutOfRangeClassId {
                pixel,
                id: rounded as u32,
            });
        }
        classes.push(rounded as u8);
    }
    SemanticMap::new(plane.width(), plane.height(), classes)
}

/// Nearest-neighbor resize for label maps. Interpolating class ids would
/// invent labels on boundaries, so labels are resampled, never blended.
pub fn resize_semantic_nearest(
    map: &SemanticMap,
    target_w: u32,
    target_h: u32,
) -> Result<SemanticMap, CoreError> {
    if target_w == 0 || target_h == 0 {
        return Err(CoreError::ZeroDimension {
            width: target_w,
            height: target_h,
        });
    }
    if target_w == map.width() && target_h == map.height() {
        return Ok(map.clone());
    }
    let sw = map.width() as usize;
    let sh = map.height() as usize;
    let scale_x = map.width() as f64 / target_w as f64;
    let scale_y = map.height() as f64 / target_h as f64;
    let mut classes = Vec::with_capacity(target_w as usize * target_h as usize);
    for dy in 0..target_h as usize {
        let sy = (((dy as f64 + 0.5) * scale_y - 0.5).round().max(0.0) as usize).min(sh - 1);
        for dx in 0..target_w as usize {
            let sx = (((dx as f64 + 0.5) * scale_x - 0.5).round().max(0.0) as usize).min(sw - 1);
            classes.push(map.classes()[sy * sw + sx]);
        }
    }
    SemanticMap::new(target_w, target_h, classes)
}

/// Reduction from the 29 raw classes to 12 enhancer groups, plus the
/// per-group G-buffer stacking policy.
///
/// Three group names carry extra semantics, checked at construction:
/// * `sky` must stack exactly `[SceneColor]`; nothing else renders there.
/// * Only `vegetation` and `vehicles` may stack `GBufferD`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGrouping {
    /// Group index for each raw class id.
    group_of: Vec<u8>,
    /// Group names, indexed by group.
    group_names: Vec<String>,
    /// Buffers stacked for each group, in stacking order.
    buffer_policy: Vec<Vec<GBufferId>>,
}

impl ClassGrouping {
    pub fn new(
        group_of: Vec<u8>,
        group_names: Vec<String>,
        buffer_policy: Vec<Vec<GBufferId>>,
    ) -> Result<Self, CoreError> {
        if group_of.len() != CLASS_COUNT {
            return Err(CoreError::BadGroupCount {
                expected: CLASS_COUNT,
                actual: group_of.len(),
            });
        }
        if group_names.len() != GROUP_COUNT {
            return Err(CoreError::BadGroupCount {
                expected: GROUP_COUNT,
                actual: group_names.len(),
            });
        }
        if buffer_policy.len() != GROUP_COUNT {
            return Err(CoreError::BadGroupCount {
                expected: GROUP_COUNT,
                actual: buffer_policy.len(),
            });
        }
        for (class, &group) in group_of.iter().enumerate() {
            if group as usize >= GROUP_COUNT {
                return Err(CoreError::GroupIndexOutOfRange {
                    class: class as u8,
                    group,
                    limit: GROUP_COUNT,
                });
            }
        }
        for (i, name) in group_names.iter().enumerate() {
            if group_names[..i].contains(name) {
                return Err(CoreError::DuplicateGroupName(name.clone()));
            }
        }
        for (group, name) in group_names.iter().enumerate() {
            if !group_of.iter().any(|&g| g as usize == group) {
                return Err(CoreError::EmptyGroup(name.clone()));
            }
        }
        for (group, policy) in buffer_policy.iter().enumerate() {
            for (i, &buffer) in policy.iter().enumerate() {
                if GBufferId::EXCLUDED_FROM_POLICIES.contains(&buffer) {
                    return Err(CoreError::ForbiddenPolicyBuffer(buffer));
                }
                if policy[..i].contains(&buffer) {
                    return Err(CoreError::DuplicatePolicyBuffer {
                        group: group_names[group].clone(),
                        buffer,
                    });
                }
            }
            let name = group_names[group].as_str();
            if name == "sky" && policy.as_slice() != [GBufferId::SceneColor] {
                return Err(CoreError::SkyPolicyViolation { got: policy.clone() });
            }
            if policy.contains(&GBufferId::GBufferD) && name != "vegetation" && name != "vehicles" {
                return Err(CoreError::GBufferDPolicyViolation(name.to_string()));
            }
        }
        Ok(Self {
            group_of,
            group_names,
            buffer_policy,
        })
    }

    /// The stock grouping: 29 classes folded into 12 groups with the
    /// standard stacking policy.
    ///
    /// Sky stacks only scene color. Vegetation and vehicles additionally
    /// stack GBufferD, whose foliage and clear-coat payloads only carry
    /// signal for those surfaces. All remaining groups stack the common
    /// eight-buffer set.
    pub fn standard() -> Self {
        use class_id::*;
        let mut group_of = vec![0u8; CLASS_COUNT];
        let assignments: [(&[u8], u8); GROUP_COUNT] = [
            (&[SKY], 0),
            (&[ROAD, ROAD_LINE], 1),
            (&[SIDEWALK], 2),
            (&[BUILDING], 3),
            (&[WALL, FENCE, GUARD_RAIL], 4),
            (&[POLE, STATIC, DYNAMIC], 5),
            (&[TRAFFIC_LIGHT], 6),
            (&[TRAFFIC_SIGN], 7),
            (&[VEGETATION, TERRAIN], 8),
            (&[PEDESTRIAN, RIDER], 9),
            (&[CAR, TRUCK, BUS, TRAIN, MOTORCYCLE, BICYCLE], 10),
            (&[UNLABELED, OTHER, WATER, GROUND, BRIDGE, RAIL_TRACK], 11),
        ];
        for (classes, group) in assignments {
            for &class in classes {
                group_of[class as usize] = group;
            }
        }
        let group_names = [
            "sky",
            "road",
            "sidewalk",
            "building",
            "wall",
            "pole",
            "traffic_light",
            "traffic_sign",
            "vegetation",
            "person",
            "vehicles",
            "other",
        ]
        .map(String::from)
        .to_vec();

        let common = vec![
            GBufferId::SceneColor,
            GBufferId::Albedo,
            GBufferId::Ssao,
            GBufferId::Normals,
            GBufferId::SceneDepth,
            GBufferId::Metallic,
            GBufferId::Specular,
            GBufferId::Roughness,
        ];
        let with_d = {
            let mut v = common.clone();
            v.insert(2, GBufferId::GBufferD);
            v
        };
        let buffer_policy = group_names
            .iter()
            .map(|name| match name.as_str() {
                "sky" => vec![GBufferId::SceneColor],
                "vegetation" | "vehicles" => with_d.clone(),
                _ => common.clone(),
            })
            .collect();

        Self::new(group_of, group_names, buffer_policy)
            .expect("standard grouping satisfies its own invariants")
    }

    pub fn group_of(&self, class: u8) -> u8 {
        self.group_of[class as usize]
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn group_index(&self, name: &str) -> Option<u8> {
        self.group_names.iter().position(|n| n == name).map(|i| i as u8)
    }

    pub fn policy(&self, group: u8) -> &[GBufferId] {
        &self.buffer_policy[group as usize]
    }

    pub fn policies(&self) -> &[Vec<GBufferId>] {
        &self.buffer_policy
    }

    /// Rebuild from parts, revalidating. Used after deserializing.
    pub fn validated(self) -> Result<Self, CoreError> {
        Self::new(self.group_of, self.group_names, self.buffer_policy)
    }
}

/// Twelve binary masks in planar layout, one byte per pixel per group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotStack {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl OneHotStack {
    /// Build from raw planar bytes, enforcing the partition invariant:
    /// per pixel, exactly one plane holds 1 and the rest hold 0.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::ZeroDimension { width, height });
        }
        let n = width as usize * height as usize;
        if data.len() != n * GROUP_COUNT {
            return Err(CoreError::DataLengthMismatch {
                expected: n * GROUP_COUNT,
                actual: data.len(),
            });
        }
        for pixel in 0..n {
            let mut sum = 0u32;
            for g in 0..GROUP_COUNT {
                let v = data[g * n + pixel];
                if v > 1 {
                    return Err(CoreError::SampleOutOfRange {
                        index: g * n + pixel,
                        value: v as f32,
                    });
                }
                sum += v as u32;
            }
            if sum != 1 {
                return Err(CoreError::NotOneHot { pixel, sum });
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Planar mask data, `GROUP_COUNT` planes of `width * height` bytes.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn plane(&self, group: u8) -> &[u8] {
        let n = self.width as usize * self.height as usize;
        &self.data[group as usize * n..(group as usize + 1) * n]
    }

    pub fn mask_at(&self, group: u8, x: u32, y: u32) -> bool {
        self.plane(group)[y as usize * self.width as usize + x as usize] == 1
    }

    /// The hot group at a flat pixel offset. The partition invariant
    /// guarantees exactly one candidate.
    pub fn group_at(&self, pixel: usize) -> usize {
        let n = self.width as usize * self.height as usize;
        (0..GROUP_COUNT)
            .find(|g| self.data[g * n + pixel] == 1)
            .expect("one-hot partition invariant")
    }
}

/// Expand a label map into the 12-plane one-hot stack.
///
/// Exactly one plane is hot per pixel; the planes partition the image.
pub fn group_semantic_map(
    map: &SemanticMap,
    grouping: &ClassGrouping,
) -> Result<OneHotStack, CoreError> {
    let n = map.width() as usize * map.height() as usize;
    let mut data = vec![0u8; n * GROUP_COUNT];
    for (pixel, &class) in map.classes().iter().enumerate() {
        let group = grouping.group_of(class) as usize;
        data[group * n + pixel] = 1;
    }
    Ok(OneHotStack {
        width: map.width(),
        height: map.height(),
        data,
    })
}
