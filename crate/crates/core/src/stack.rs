//! Assembly of enhancer inputs: per-group G-buffer stacks masked by the
//! one-hot planes.

use std::collections::BTreeMap;

use crate::error::CoreError;
use crate::gbuffer::GBufferSet;
use crate::image::{ImagePlane, PlanarTensor};
use crate::semantic::{ClassGrouping, OneHotStack, GROUP_COUNT};

/// Everything the enhancer sees for one frame: the tone-mapped image, the
/// one-hot group masks, and one masked channel-major stack per group.
#[derive(Debug, Clone)]
pub struct EnhancerInput {
    pub frame_id: u64,
    pub rgb: ImagePlane,
    pub onehot: OneHotStack,
    /// Keyed by group index; groups whose policy is empty are absent.
    pub streams: BTreeMap<u8, PlanarTensor>,
}

impl EnhancerInput {
    /// Total stacked channels across all group streams.
    pub fn stream_channels(&self) -> usize {
        self.streams.values().map(|t| t.channels() as usize).sum()
    }
}

/// Build the per-group stacks. For group g the policy's buffers are
/// concatenated channel-major in policy order, and every sample is zeroed
/// where the group's mask is cold. Buffer order within a stack is the policy
/// order, not buffer-id order.
pub fn stack_filtered_gbuffers(
    gbuffers: &GBufferSet,
    onehot: &OneHotStack,
    grouping: &ClassGrouping,
) -> Result<BTreeMap<u8, PlanarTensor>, CoreError> {
    if gbuffers.width() != onehot.width() || gbuffers.height() != onehot.height() {
        return Err(CoreError::DimensionMismatch {
            what: "one-hot stack vs gbuffers",
            expected_w: gbuffers.width(),
            expected_h: gbuffers.height(),
            actual_w: onehot.width(),
            actual_h: onehot.height(),
        });
    }
    let w = gbuffers.width() as usize;
    let h = gbuffers.height() as usize;
    let pixels = w * h;

    let mut streams = BTreeMap::new();
    for group in 0..GROUP_COUNT as u8 {
        let policy = grouping.policy(group);
        if policy.is_empty() {
            continue;
        }
        let mask = onehot.plane(group);
        let total_channels: usize = policy.iter().map(|b| b.channels() as usize).sum();
        let mut data = vec![0.0f32; total_channels * pixels];
        let mut plane_base = 0usize;
        for &id in policy {
            let plane = gbuffers.require(id)?;
            let src = plane.data();
            let channels = id.channels() as usize;
            for c in 0..channels {
                let dst = &mut data[(plane_base + c) * pixels..(plane_base + c + 1) * pixels];
                for (pix, slot) in dst.iter_mut().enumerate() {
                    if mask[pix] == 1 {
                        *slot = src[pix * channels + c];
                    }
                }
            }
            plane_base += channels;
        }
        streams.insert(
            group,
            PlanarTensor::new(
                gbuffers.width(),
                gbuffers.height(),
                total_channels as u16,
                data,
            )?,
        );
    }
    Ok(streams)
}

/// Check that a stream map was produced under the given policy: the right
/// groups are present and each stack has the policy's channel count.
pub fn validate_streams(
    streams: &BTreeMap<u8, PlanarTensor>,
    grouping: &ClassGrouping,
) -> Result<(), CoreError> {
    for group in 0..GROUP_COUNT as u8 {
        let policy = grouping.policy(group);
        let expected: usize = policy.iter().map(|b| b.channels() as usize).sum();
        match streams.get(&group) {
            None if policy.is_empty() => {}
            None => {
                return Err(CoreError::MissingBuffer {
                    frame_id: 0,
                    buffer: policy[0],
                })
            }
            Some(t) => {
                if t.channels() as usize != expected {
                    return Err(CoreError::ChannelMismatch {
                        what: "group stream",
                        expected: expected as u8,
                        actual: t.channels() as u8,
                    });
                }
            }
        }
    }
    Ok(())
}
