//! Error type shared by the core transforms.

use crate::gbuffer::GBufferId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CoreError {
    #[error("image dimensions must be nonzero, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },

    #[error("channel count {0} unsupported, expected 1, 2, 3 or 4")]
    BadChannelCount(u8),

    #[error("sample buffer holds {actual} values, dimensions require {expected}")]
    DataLengthMismatch { expected: usize, actual: usize },

    #[error("sample {index} is {value}, outside the normalized range [0, 1]")]
    SampleOutOfRange { index: usize, value: f32 },

    #[error("{what}: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        what: &'static str,
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },

    #[error("{what}: expected {expected} channels, got {actual}")]
    ChannelMismatch {
        what: &'static str,
        expected: u8,
        actual: u8,
    },

    #[error("pixel {pixel} encodes class id {id}, scheme defines ids 0..=28")]
    OutOfRangeClassId { pixel: usize, id: u32 },

    #[error("pixel {pixel} holds {value}, not a class id scaled by 1/255")]
    NonIntegralStencil { pixel: usize, value: f32 },

    #[error("pixel {pixel} is hot in {sum} planes, a one-hot stack needs exactly 1")]
    NotOneHot { pixel: usize, sum: u32 },

    #[error("grouping must define exactly {expected} groups, got {actual}")]
    BadGroupCount { expected: usize, actual: usize },

    #[error("class {class} maps to group {group}, only {limit} groups exist")]
    GroupIndexOutOfRange { class: u8, group: u8, limit: usize },

    #[error("group '{0}' is not the target of any class")]
    EmptyGroup(String),

    #[error("group name '{0}' appears more than once")]
    DuplicateGroupName(String),

    #[error("buffer {0:?} may not appear in any stacking policy")]
    ForbiddenPolicyBuffer(GBufferId),

    #[error("group '{group}' lists {buffer:?} twice in its policy")]
    DuplicatePolicyBuffer { group: String, buffer: GBufferId },

    #[error("the sky group must stack exactly [SceneColor], got {got:?}")]
    SkyPolicyViolation { got: Vec<GBufferId> },

    #[error("GBufferD is reserved for vegetation and vehicles, found in group '{0}'")]
    GBufferDPolicyViolation(String),

    #[error("bundle for frame {frame_id} is missing buffer {buffer:?}")]
    MissingBuffer { frame_id: u64, buffer: GBufferId },

    #[error("buffer {buffer:?} carries {actual} channels, inventory requires {expected}")]
    BufferChannelMismatch {
        buffer: GBufferId,
        expected: u8,
        actual: u8,
    },

    #[error("frame id mismatch: {what} carries {actual}, bundle is {expected}")]
    FrameIdMismatch {
        what: &'static str,
        expected: u64,
        actual: u64,
    },
}
