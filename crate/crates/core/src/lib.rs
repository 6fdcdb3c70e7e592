//! Shared vocabulary for the enhancement pipeline: image planes, G-buffer
//! inventories, semantic class grouping, and the pure transforms that turn a
//! raw sensor bundle into enhancer-ready tensors.
//!
//! Everything in this crate is deterministic and side-effect free. Anything
//! that touches a clock, a socket, or a thread lives elsewhere.

pub mod bundle;
pub mod error;
pub mod gbuffer;
pub mod image;
pub mod semantic;
pub mod stack;

pub use bundle::{FrameBundle, LidarPoint, LidarScan, VehicleStatus};
pub use error::CoreError;
pub use gbuffer::{GBufferId, GBufferSet};
pub use image::{resize_bilinear, ImagePlane, PlanarTensor, Precision};
pub use semantic::{
    class_id, group_semantic_map, resize_semantic_nearest, stencil_to_semantic, ClassGrouping,
    OneHotStack, SemanticMap, CLASS_COUNT, CLASS_NAMES, GROUP_COUNT,
};
pub use stack::{stack_filtered_gbuffers, validate_streams, EnhancerInput};
