//! Frame-id keyed bundle assembly. Sensor frames may arrive interleaved
//! and mildly out of order (network transports reorder nothing, but the
//! pipelined driver keeps several ticks in flight); the assembler groups
//! them by frame id, emits a bundle the moment its required set is
//! complete, and discards anything that arrives behind the watermark.

use std::collections::{BTreeMap, BTreeSet};

use g2r_core::{
    stencil_to_semantic, FrameBundle, GBufferId, GBufferSet, ImagePlane, LidarScan, SemanticMap,
    VehicleStatus,
};
use g2r_wire::{SensorChannel, SensorFrame, SensorSelect};

use crate::error::PipelineError;

/// What must arrive before a frame counts as complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredSet {
    pub rgb: bool,
    /// Semantic stencil; always required, the enhancer input needs labels.
    pub stencil: bool,
    /// Non-stencil buffers expected from the g-buffer subscription.
    pub gbuffers: BTreeSet<GBufferId>,
    pub lidar: bool,
    pub vehicle: bool,
    pub actor_ids: bool,
}

/// The buffers the engine streams under the g-buffer subscription.
pub const CORE_GBUFFERS: [GBufferId; 9] = [
    GBufferId::SceneColor,
    GBufferId::SceneDepth,
    GBufferId::Albedo,
    GBufferId::GBufferD,
    GBufferId::Ssao,
    GBufferId::Normals,
    GBufferId::Metallic,
    GBufferId::Specular,
    GBufferId::Roughness,
];

impl RequiredSet {
    /// Color, the nine core buffers and the stencil: what preprocessing
    /// needs at minimum.
    pub fn standard() -> Self {
        RequiredSet {
            rgb: true,
            stencil: true,
            gbuffers: CORE_GBUFFERS.into_iter().collect(),
            lidar: false,
            vehicle: false,
            actor_ids: false,
        }
    }

    pub fn from_subscriptions(subs: &[SensorSelect], include_exotic: bool) -> Self {
        let mut gbuffers = BTreeSet::new();
        if subs.contains(&SensorSelect::GBuffers) {
            gbuffers.extend(CORE_GBUFFERS);
            if include_exotic {
                gbuffers.extend([GBufferId::Velocity, GBufferId::GBufferE, GBufferId::GBufferF]);
            }
        }
        RequiredSet {
            rgb: subs.contains(&SensorSelect::Rgb),
            stencil: subs.contains(&SensorSelect::Stencil),
            gbuffers,
            lidar: subs.contains(&SensorSelect::Lidar),
            vehicle: subs.contains(&SensorSelect::VehicleStatus),
            actor_ids: subs.contains(&SensorSelect::ActorIds),
        }
    }

    pub fn subscriptions(&self) -> Vec<SensorSelect> {
        let mut subs = Vec::new();
        if self.rgb {
            subs.push(SensorSelect::Rgb);
        }
        if !self.gbuffers.is_empty() {
            subs.push(SensorSelect::GBuffers);
        }
        if self.stencil {
            subs.push(SensorSelect::Stencil);
        }
        if self.lidar {
            subs.push(SensorSelect::Lidar);
        }
        if self.vehicle {
            subs.push(SensorSelect::VehicleStatus);
        }
        if self.actor_ids {
            subs.push(SensorSelect::ActorIds);
        }
        subs
    }
}

#[derive(Debug, Default)]
struct Pending {
    rgb: Option<ImagePlane>,
    semantics: Option<SemanticMap>,
    buffers: BTreeMap<GBufferId, ImagePlane>,
    lidar: Option<LidarScan>,
    vehicle: Option<VehicleStatus>,
    actor_ids: Option<Vec<u64>>,
}

impl Pending {
    fn complete(&self, required: &RequiredSet) -> bool {
        (!required.rgb || self.rgb.is_some())
            && (!required.stencil || self.semantics.is_some())
            && required.gbuffers.iter().all(|id| self.buffers.contains_key(id))
            && (!required.lidar || self.lidar.is_some())
            && (!required.vehicle || self.vehicle.is_some())
            && (!required.actor_ids || self.actor_ids.is_some())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblerStats {
    /// Frames that arrived at or behind the watermark.
    pub late_discarded: u64,
    /// Pending frames thrown away because a newer frame completed first
    /// or the pending window overflowed.
    pub incomplete_evicted: u64,
    pub bundles_emitted: u64,
}

pub struct BundleAssembler {
    required: RequiredSet,
    pending: BTreeMap<u64, Pending>,
    /// Highest emitted frame id; anything at or below is late.
    watermark: Option<u64>,
    /// Upper bound on simultaneously open frames.
    max_pending: usize,
    stats: AssemblerStats,
}

impl BundleAssembler {
    pub fn new(required: RequiredSet) -> Self {
        BundleAssembler {
            required,
            pending: BTreeMap::new(),
            watermark: None,
            max_pending: 64,
            stats: AssemblerStats::default(),
        }
    }

    pub fn stats(&self) -> AssemblerStats {
        self.stats
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Feed one sensor frame; returns a bundle when one completes.
    pub fn offer(&mut self, frame: SensorFrame) -> Result<Option<FrameBundle>, PipelineError> {
        let frame_id = frame.frame_id;
        if self.watermark.is_some_and(|w| frame_id <= w) {
            self.stats.late_discarded += 1;
            return Ok(None);
        }

        let pending = self.pending.entry(frame_id).or_default();
        match frame.channel {
            SensorChannel::Rgb => pending.rgb = Some(frame.to_image_plane()?),
            SensorChannel::GBuffer(GBufferId::CustomStencil) => {
                let plane = frame.to_image_plane()?;
                pending.semantics = Some(stencil_to_semantic(&plane)?);
                // The raw plane also rides along for consumers that want
                // the stencil in the buffer set (capture does).
                pending.buffers.insert(GBufferId::CustomStencil, plane);
            }
            SensorChannel::GBuffer(id) => {
                pending.buffers.insert(id, frame.to_image_plane()?);
            }
            SensorChannel::Lidar => pending.lidar = Some(frame.to_lidar()?),
            SensorChannel::VehicleStatus => pending.vehicle = Some(frame.to_vehicle_status()?),
            SensorChannel::ActorIds => pending.actor_ids = Some(frame.to_actor_ids()?),
            SensorChannel::OneHot | SensorChannel::Stream(_) => {
                return Err(PipelineError::UnsubscribedChannel {
                    frame_id,
                    channel: format!("{:?}", frame.channel),
                });
            }
        }

        if self.pending[&frame_id].complete(&self.required) {
            let pending = self.pending.remove(&frame_id).expect("present");
            // Everything older can no longer complete first.
            let stale: Vec<u64> = self
                .pending
                .range(..frame_id)
                .map(|(&id, _)| id)
                .collect();
            self.stats.incomplete_evicted += stale.len() as u64;
            for id in stale {
                self.pending.remove(&id);
            }
            self.watermark = Some(frame_id);
            self.stats.bundles_emitted += 1;
            return Ok(Some(self.finish(frame_id, pending)?));
        }

        // Overflow guard: drop the oldest open frame.
        while self.pending.len() > self.max_pending {
            let oldest = *self.pending.keys().next().expect("nonempty");
            self.pending.remove(&oldest);
            self.stats.incomplete_evicted += 1;
        }
        Ok(None)
    }

    fn finish(&self, frame_id: u64, pending: Pending) -> Result<FrameBundle, PipelineError> {
        let Pending {
            rgb,
            semantics,
            buffers,
            lidar,
            vehicle,
            actor_ids,
        } = pending;
        let rgb = rgb.ok_or(g2r_core::CoreError::MissingBuffer {
            frame_id,
            buffer: GBufferId::SceneColor,
        })?;
        let semantics = semantics.ok_or(g2r_core::CoreError::MissingBuffer {
            frame_id,
            buffer: GBufferId::CustomStencil,
        })?;
        let gbuffers = GBufferSet::new(frame_id, buffers)?;
        let bundle = FrameBundle {
            frame_id,
            rgb,
            gbuffers,
            semantics,
            lidar,
            actor_ids,
            vehicle,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}
