//! Per-frame sensor bundles: the joined view of everything the engine
//! produced for a single tick.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::gbuffer::GBufferSet;
use crate::image::ImagePlane;
use crate::semantic::SemanticMap;

/// One simulated lidar return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarPoint {
    /// Horizontal angle in radians, `[0, 2pi)`.
    pub azimuth: f32,
    /// Vertical angle in radians, negative is downward.
    pub elevation: f32,
    /// Distance to the hit in meters.
    pub range: f32,
    /// Semantic class of the surface hit.
    pub class_id: u8,
    /// Stable id of the actor hit; 0 for ground and sky-less static scenery.
    pub actor_id: u64,
}

/// All returns of one lidar sweep. Misses are omitted, so the point count
/// varies per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub frame_id: u64,
    pub points: Vec<LidarPoint>,
}

impl LidarScan {
    /// Number of returns attributed to a given actor.
    pub fn hits_for_actor(&self, actor_id: u64) -> usize {
        self.points.iter().filter(|p| p.actor_id == actor_id).count()
    }
}

/// Ego vehicle state at a tick, as reported over the status channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleStatus {
    pub steer: f32,
    pub throttle: f32,
    pub brake: f32,
    pub speed_mps: f32,
}

/// The joined per-frame view: RGB, G-buffers and labels that all carry the
/// same frame id, plus optional slower channels.
#[derive(Debug, Clone)]
pub struct FrameBundle {
    pub frame_id: u64,
    pub rgb: ImagePlane,
    pub gbuffers: GBufferSet,
    pub semantics: SemanticMap,
    pub lidar: Option<LidarScan>,
    /// Per-pixel actor ids aligned with `semantics`, when requested.
    pub actor_ids: Option<Vec<u64>>,
    pub vehicle: Option<VehicleStatus>,
}

impl FrameBundle {
    /// Validate internal consistency: ids agree and rasters share dimensions.
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.gbuffers.frame_id() != self.frame_id {
            return Err(CoreError::FrameIdMismatch {
                what: "gbuffer set",
                expected: self.frame_id,
                actual: self.gbuffers.frame_id(),
            });
        }
        if let Some(lidar) = &self.lidar {
            if lidar.frame_id != self.frame_id {
                return Err(CoreError::FrameIdMismatch {
                    what: "lidar scan",
                    expected: self.frame_id,
                    actual: lidar.frame_id,
                });
            }
        }
        if self.rgb.width() != self.gbuffers.width() || self.rgb.height() != self.gbuffers.height()
        {
            return Err(CoreError::DimensionMismatch {
                what: "rgb vs gbuffers",
                expected_w: self.gbuffers.width(),
                expected_h: self.gbuffers.height(),
                actual_w: self.rgb.width(),
                actual_h: self.rgb.height(),
            });
        }
        if self.semantics.width() != self.gbuffers.width()
            || self.semantics.height() != self.gbuffers.height()
        {
            return Err(CoreError::DimensionMismatch {
                what: "semantics vs gbuffers",
                expected_w: self.gbuffers.width(),
                expected_h: self.gbuffers.height(),
                actual_w: self.semantics.width(),
                actual_h: self.semantics.height(),
            });
        }
        if let Some(ids) = &self.actor_ids {
            let expected = self.semantics.width() as usize * self.semantics.height() as usize;
            if ids.len() != expected {
                return Err(CoreError::DataLengthMismatch {
                    expected,
                    actual: ids.len(),
                });
            }
        }
        Ok(())
    }
}
