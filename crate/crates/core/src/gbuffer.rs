//! Deferred-rendering buffer inventory and per-frame buffer sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::image::ImagePlane;

/// Every intermediate render target the engine can expose.
///
/// `Velocity`, `GBufferE` and `GBufferF` are representable so the wire layer
/// can name them, but no stacking policy may consume them: velocity is
/// meaningless for single-frame enhancement and E/F carry engine-internal
/// payloads with no stable interpretation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum GBufferId {
    SceneColor,
    SceneDepth,
    Albedo,
    GBufferD,
    Ssao,
    Normals,
    Metallic,
    Specular,
    Roughness,
    CustomStencil,
    Velocity,
    GBufferE,
    GBufferF,
}

impl GBufferId {
    pub const ALL: [GBufferId; 13] = [
        GBufferId::SceneColor,
        GBufferId::SceneDepth,
        GBufferId::Albedo,
        GBufferId::GBufferD,
        GBufferId::Ssao,
        GBufferId::Normals,
        GBufferId::Metallic,
        GBufferId::Specular,
        GBufferId::Roughness,
        GBufferId::CustomStencil,
        GBufferId::Velocity,
        GBufferId::GBufferE,
        GBufferId::GBufferF,
    ];

    /// Buffers banned from every stacking policy.
    pub const EXCLUDED_FROM_POLICIES: [GBufferId; 3] =
        [GBufferId::Velocity, GBufferId::GBufferE, GBufferId::GBufferF];

    /// Channel count each buffer carries on the wire and in memory.
    pub fn channels(self) -> u8 {
        match self {
            GBufferId::SceneColor | GBufferId::Albedo | GBufferId::Normals => 3,
            GBufferId::GBufferE | GBufferId::GBufferF => 3,
            GBufferId::GBufferD => 3,
            GBufferId::Velocity => 2,
            GBufferId::SceneDepth
            | GBufferId::Ssao
            | GBufferId::Metallic
            | GBufferId::Specular
            | GBufferId::Roughness
            | GBufferId::CustomStencil => 1,
        }
    }

    /// Stable wire code, also the order buffers appear in containers.
    pub fn code(self) -> u8 {
        GBufferId::ALL.iter().position(|&b| b == self).unwrap() as u8
    }

    pub fn from_code(code: u8) -> Option<GBufferId> {
        GBufferId::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            GBufferId::SceneColor => "scene_color",
            GBufferId::SceneDepth => "scene_depth",
            GBufferId::Albedo => "albedo",
            GBufferId::GBufferD => "gbuffer_d",
            GBufferId::Ssao => "ssao",
            GBufferId::Normals => "normals",
            GBufferId::Metallic => "metallic",
            GBufferId::Specular => "specular",
            GBufferId::Roughness => "roughness",
            GBufferId::CustomStencil => "custom_stencil",
            GBufferId::Velocity => "velocity",
            GBufferId::GBufferE => "gbuffer_e",
            GBufferId::GBufferF => "gbuffer_f",
        }
    }
}

/// All buffers captured for one frame, keyed by id, with uniform dimensions.
#[derive(Debug, Clone)]
pub struct GBufferSet {
    frame_id: u64,
    width: u32,
    height: u32,
    buffers: BTreeMap<GBufferId, ImagePlane>,
}

impl GBufferSet {
    pub fn new(
        frame_id: u64,
        buffers: BTreeMap<GBufferId, ImagePlane>,
    ) -> Result<Self, CoreError> {
        let mut dims: Option<(u32, u32)> = None;
        for (&id, plane) in &buffers {
            if plane.channels() != id.channels() {
                return Err(CoreError::BufferChannelMismatch {
                    buffer: id,
                    expected: id.channels(),
                    actual: plane.channels(),
                });
            }
            match dims {
                None => dims = Some((plane.width(), plane.height())),
                Some((w, h)) => {
                    if plane.width() != w || plane.height() != h {
                        return Err(CoreError::DimensionMismatch {
                            what: "gbuffer set",
                            expected_w: w,
                            expected_h: h,
                            actual_w: plane.width(),
                            actual_h: plane.height(),
                        });
                    }
                }
            }
        }
        let (width, height) = dims.ok_or(CoreError::MissingBuffer {
            frame_id,
            buffer: GBufferId::SceneColor,
        })?;
        Ok(Self {
            frame_id,
            width,
            height,
            buffers,
        })
    }

    pub fn frame_id(&self) -> u64 {
        self.frame_id
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, id: GBufferId) -> Option<&ImagePlane> {
        self.buffers.get(&id)
    }

    pub fn require(&self, id: GBufferId) -> Result<&ImagePlane, CoreError> {
        self.buffers.get(&id).ok_or(CoreError::MissingBuffer {
            frame_id: self.frame_id,
            buffer: id,
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = GBufferId> + '_ {
        self.buffers.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GBufferId, &ImagePlane)> {
        self.buffers.iter().map(|(&id, plane)| (id, plane))
    }

    pub fn len(&self) -> usize {
        self.buffers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.is_empty()
    }

    pub fn insert(&mut self, id: GBufferId, plane: ImagePlane) -> Result<(), CoreError> {
        if plane.channels() != id.channels() {
            return Err(CoreError::BufferChannelMismatch {
                buffer: id,
                expected: id.channels(),
                actual: plane.channels(),
            });
        }
        if plane.width() != self.width || plane.height() != self.height {
            return Err(CoreError::DimensionMismatch {
                what: "gbuffer set",
                expected_w: self.width,
                expected_h: self.height,
                actual_w: plane.width(),
                actual_h: plane.height(),
            });
        }
        self.buffers.insert(id, plane);
        Ok(())
    }
}
