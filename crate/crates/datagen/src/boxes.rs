//! Object-detection boxes derived from the semantic stencil, the per-pixel
//! actor map, and the lidar sweep.
//!
//! The stencil tells which pixels belong to a detection class; the actor
//! map splits adjacent same-class instances apart; the lidar return count
//! decides whether an instance is flagged occluded. Boxes are tight pixel
//! extents in 0-based image coordinates, converted to the 1-based
//! inclusive convention only at XML serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use g2r_core::{LidarScan, SemanticMap};
use serde::{Deserialize, Serialize};

use crate::config::CaptureConfig;
use crate::error::DatagenError;

/// One detection annotation, in 0-based inclusive pixel coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocRecord {
    pub class_name: String,
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
    /// Box touches the image border.
    pub truncated: bool,
    /// Too few lidar returns to consider the instance well observed.
    pub occluded: bool,
    pub actor_id: u64,
}

#[derive(Debug, Clone, Copy)]
struct Extent {
    xmin: u32,
    ymin: u32,
    xmax: u32,
    ymax: u32,
    pixels: u64,
}

impl Extent {
    fn grow(&mut self, x: u32, y: u32) {
        self.xmin = self.xmin.min(x);
        self.ymin = self.ymin.min(y);
        self.xmax = self.xmax.max(x);
        self.ymax = self.ymax.max(y);
        self.pixels += 1;
    }
}

/// Compute detection boxes for one frame.
///
/// `frame_id` is the frame the stencil belongs to; the lidar scan must
/// carry the same id. Actor id 0 marks non-instance scenery and never
/// produces a box.
pub fn generate_boxes(
    stencil: &SemanticMap,
    actor_ids: &[u64],
    lidar: &LidarScan,
    frame_id: u64,
    cfg: &CaptureConfig,
) -> Result<Vec<VocRecord>, DatagenError> {
    if lidar.frame_id != frame_id {
        return Err(DatagenError::FrameIdMismatch {
            expected: frame_id,
            got: lidar.frame_id,
        });
    }
    let pixels = stencil.width() as usize * stencil.height() as usize;
    if actor_ids.len() != pixels {
        return Err(DatagenError::ActorMapMismatch {
            expected: pixels,
            got: actor_ids.len(),
        });
    }

    let mut class_index = [usize::MAX; 256];
    for (i, dc) in cfg.detection_classes.iter().enumerate() {
        class_index[dc.class_id as usize] = i;
    }

    // Keyed by (detection class position, actor id) so output order is
    // the class list order, then actor id.
    let mut extents: BTreeMap<(usize, u64), Extent> = BTreeMap::new();
    let width = stencil.width();
    for (pixel, (&class, &actor)) in stencil.classes().iter().zip(actor_ids).enumerate() {
        let index = class_index[class as usize];
        if index == usize::MAX || actor == 0 {
            continue;
        }
        let x = pixel as u32 % width;
        let y = pixel as u32 / width;
        extents
            .entry((index, actor))
            .and_modify(|e| e.grow(x, y))
            .or_insert(Extent {
                xmin: x,
                ymin: y,
                xmax: x,
                ymax: y,
                pixels: 1,
            });
    }

    let mut lidar_hits: BTreeMap<u64, usize> = BTreeMap::new();
    for point in &lidar.points {
        *lidar_hits.entry(point.actor_id).or_insert(0) += 1;
    }

    let last_x = stencil.width() - 1;
    let last_y = stencil.height() - 1;
    let mut records = Vec::new();
    for ((index, actor_id), extent) in extents {
        if extent.pixels < cfg.min_box_area {
            continue;
        }
        let hits = lidar_hits.get(&actor_id).copied().unwrap_or(0);
        records.push(VocRecord {
            class_name: cfg.detection_classes[index].name.clone(),
            xmin: extent.xmin,
            ymin: extent.ymin,
            xmax: extent.xmax,
            ymax: extent.ymax,
            truncated: extent.xmin == 0
                || extent.ymin == 0
                || extent.xmax == last_x
                || extent.ymax == last_y,
            occluded: hits < cfg.occlusion_min_points,
            actor_id,
        });
    }
    Ok(records)
}

/// Size and name block of the annotated image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub filename: String,
    pub width: u32,
    pub height: u32,
    /// Channel count of the annotated image, 3 for color.
    pub depth: u8,
}

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}

/// Serialize records as annotation XML. Internal 0-based inclusive boxes
/// become 1-based inclusive in the file, matching the usual convention.
pub fn write_voc_xml(records: &[VocRecord], meta: &ImageMeta) -> String {
    let mut xml = String::new();
    xml.push_str("<annotation>\n");
    let _ = writeln!(xml, "  <filename>{}</filename>", xml_escape(&meta.filename));
    xml.push_str("  <size>\n");
    let _ = writeln!(xml, "    <width>{}</width>", meta.width);
    let _ = writeln!(xml, "    <height>{}</height>", meta.height);
    let _ = writeln!(xml, "    <depth>{}</depth>", meta.depth);
    xml.push_str("  </size>\n");
    for record in records {
        xml.push_str("  <object>\n");
        let _ = writeln!(xml, "    <name>{}</name>", xml_escape(&record.class_name));
        let _ = writeln!(xml, "    <truncated>{}</truncated>", record.truncated as u8);
        let _ = writeln!(xml, "    <difficult>{}</difficult>", record.occluded as u8);
        xml.push_str("    <bndbox>\n");
        let _ = writeln!(xml, "      <xmin>{}</xmin>", record.xmin + 1);
        let _ = writeln!(xml, "      <ymin>{}</ymin>", record.ymin + 1);
        let _ = writeln!(xml, "      <xmax>{}</xmax>", record.xmax + 1);
        let _ = writeln!(xml, "      <ymax>{}</ymax>", record.ymax + 1);
        xml.push_str("    </bndbox>\n");
        xml.push_str("  </object>\n");
    }
    xml.push_str("</annotation>\n");
    xml
}
