//! Turns an assembled frame bundle into an enhancer input at the model's
//! working resolution. Three independent lanes: color (bilinear), labels
//! (nearest then one-hot), material streams (bilinear then group-masked
//! stacking). Each lane is timed so the driver can report where frame
//! budget goes.

use std::collections::BTreeMap;
use std::time::Instant;

use g2r_core::{
    group_semantic_map, resize_bilinear, resize_semantic_nearest, stack_filtered_gbuffers,
    validate_streams, ClassGrouping, EnhancerInput, FrameBundle, GBufferId, GBufferSet,
    ImagePlane, OneHotStack, PlanarTensor,
};

use crate::error::PipelineError;

/// Wall time each lane spent on one frame, in nanoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LaneTimings {
    pub color_ns: u64,
    pub semantics_ns: u64,
    pub streams_ns: u64,
}

pub struct Preprocessor {
    grouping: ClassGrouping,
    target_w: u32,
    target_h: u32,
}

impl Preprocessor {
    pub fn new(grouping: ClassGrouping, target_w: u32, target_h: u32) -> Self {
        Preprocessor {
            grouping,
            target_w,
            target_h,
        }
    }

    pub fn grouping(&self) -> &ClassGrouping {
        &self.grouping
    }

    pub fn target(&self) -> (u32, u32) {
        (self.target_w, self.target_h)
    }

    /// Color lane: the rendered frame, resampled to the working size.
    pub fn lane_color(&self, bundle: &FrameBundle) -> Result<ImagePlane, PipelineError> {
        Ok(resize_bilinear(&bundle.rgb, self.target_w, self.target_h)?)
    }

    /// Label lane: nearest-neighbor resample keeps ids crisp, then the
    /// grouping expands them into the one-hot stack.
    pub fn lane_semantics(&self, bundle: &FrameBundle) -> Result<OneHotStack, PipelineError> {
        let resized = resize_semantic_nearest(&bundle.semantics, self.target_w, self.target_h)?;
        Ok(group_semantic_map(&resized, &self.grouping)?)
    }

    /// Stream lane: every material buffer the policies reference is
    /// resampled, then stacked per group with cold pixels zeroed.
    pub fn lane_streams(
        &self,
        bundle: &FrameBundle,
        onehot: &OneHotStack,
    ) -> Result<BTreeMap<u8, PlanarTensor>, PipelineError> {
        let mut resized = BTreeMap::new();
        for (id, plane) in bundle.gbuffers.iter() {
            // The stencil is labels, not signal, and the excluded buffers
            // never appear in any policy; both stay out of the stacks.
            if id == GBufferId::CustomStencil || GBufferId::EXCLUDED_FROM_POLICIES.contains(&id) {
                continue;
            }
            resized.insert(id, resize_bilinear(plane, self.target_w, self.target_h)?);
        }
        let target_set = GBufferSet::new(bundle.frame_id, resized)?;
        let streams = stack_filtered_gbuffers(&target_set, onehot, &self.grouping)?;
        validate_streams(&streams, &self.grouping)?;
        Ok(streams)
    }

    /// Run all three lanes and assemble the enhancer input.
    pub fn prepare(
        &self,
        bundle: &FrameBundle,
    ) -> Result<(EnhancerInput, LaneTimings), PipelineError> {
        let mut timings = LaneTimings::default();

        let start = Instant::now();
        let rgb = self.lane_color(bundle)?;
        timings.color_ns = start.elapsed().as_nanos() as u64;

        let start = Instant::now();
        let onehot = self.lane_semantics(bundle)?;
        timings.semantics_ns = start.elapsed().as_nanos() as u64;

        let start = Instant::now();
        let streams = self.lane_streams(bundle, &onehot)?;
        timings.streams_ns = start.elapsed().as_nanos() as u64;

        Ok((
            EnhancerInput {
                frame_id: bundle.frame_id,
                rgb,
                onehot,
                streams,
            },
            timings,
        ))
    }
}
