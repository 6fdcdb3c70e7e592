//! Capture configuration: cadence, products, formats, and the detection
//! class list.

use std::collections::BTreeSet;
use std::path::PathBuf;

use g2r_core::class_id;
use serde::{Deserialize, Serialize};

use crate::error::DatagenError;

/// One emittable data product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Product {
    Frame,
    EnhancedFrame,
    Semantic,
    Depth,
    Boxes,
    VehicleStatus,
    WorldStatus,
}

impl Product {
    pub const ALL: [Product; 7] = [
        Product::Frame,
        Product::EnhancedFrame,
        Product::Semantic,
        Product::Depth,
        Product::Boxes,
        Product::VehicleStatus,
        Product::WorldStatus,
    ];
}

/// Encoding for the color products. Labels and depth always use PNG,
/// lossy formats would corrupt them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFormat {
    Png,
    Jpg,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Jpg => "jpg",
        }
    }
}

/// Layout of the packed buffer file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferContainer {
    PackedF32,
}

/// One entry of the detection class list: the label written to the
/// annotation and the raw semantic class it selects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionClass {
    pub name: String,
    pub class_id: u8,
}

impl DetectionClass {
    fn new(name: &str, class_id: u8) -> Self {
        DetectionClass {
            name: name.to_string(),
            class_id,
        }
    }
}

/// The nine standard detection classes.
pub fn default_detection_classes() -> Vec<DetectionClass> {
    vec![
        DetectionClass::new("person", class_id::PEDESTRIAN),
        DetectionClass::new("vehicle", class_id::CAR),
        DetectionClass::new("truck", class_id::TRUCK),
        DetectionClass::new("bus", class_id::BUS),
        DetectionClass::new("motorcycle", class_id::MOTORCYCLE),
        DetectionClass::new("bicycle", class_id::BICYCLE),
        DetectionClass::new("rider", class_id::RIDER),
        DetectionClass::new("traffic_light", class_id::TRAFFIC_LIGHT),
        DetectionClass::new("traffic_sign", class_id::TRAFFIC_SIGN),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureConfig {
    /// Capture one frame out of every `every_n` ticks.
    pub every_n: u64,
    pub out_dir: PathBuf,
    pub products: BTreeSet<Product>,
    pub image_format: ImageFormat,
    /// When set, the full buffer set is also packed per capture.
    pub buffer_container: Option<BufferContainer>,
    /// Boxes whose visible pixel count falls below this are dropped.
    pub min_box_area: u64,
    /// Actors with fewer lidar returns than this are flagged occluded.
    pub occlusion_min_points: usize,
    pub detection_classes: Vec<DetectionClass>,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        CaptureConfig {
            every_n: 20,
            out_dir: PathBuf::from("dataset"),
            products: Product::ALL.into_iter().collect(),
            image_format: ImageFormat::Png,
            buffer_container: Some(BufferContainer::PackedF32),
            min_box_area: 1,
            occlusion_min_points: 3,
            detection_classes: default_detection_classes(),
        }
    }
}

impl CaptureConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.every_n == 0 {
            return Err(DatagenError::ZeroCadence);
        }
        if self.min_box_area == 0 {
            return Err(DatagenError::ZeroBoxArea);
        }
        Ok(())
    }
}

/// Cadence rule: capture on every tick divisible by `every_n`.
pub fn should_capture(tick: u64, every_n: u64) -> bool {
    debug_assert!(every_n >= 1);
    tick % every_n == 0
}
