//! Dataset products: cadence-controlled capture of frames, labels, depth,
//! packed buffer sets, detection boxes with occlusion and truncation
//! flags, and status records, under a completeness-checked manifest.

pub mod boxes;
pub mod capture;
pub mod config;
pub mod container;
pub mod error;
pub mod status;

pub use boxes::{generate_boxes, write_voc_xml, ImageMeta, VocRecord};
pub use capture::{read_manifest, CaptureSession, ManifestEntry};
pub use config::{
    default_detection_classes, should_capture, BufferContainer, CaptureConfig, DetectionClass,
    ImageFormat, Product,
};
pub use container::{read_container, write_container, CONTAINER_MAGIC, CONTAINER_VERSION};
pub use error::DatagenError;
pub use status::{vehicle_json, world_json, WorldStatusRecord};
