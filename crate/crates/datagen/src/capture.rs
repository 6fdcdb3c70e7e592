//! Capture session: writes the per-frame data products and keeps the
//! manifest. One capture either lands completely or not at all; a failed
//! product removes everything already written for that frame's stem.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use g2r_core::{FrameBundle, GBufferId, ImagePlane};
use image::{GrayImage, ImageBuffer, Luma, RgbImage};
use serde::{Deserialize, Serialize};

use crate::boxes::{generate_boxes, write_voc_xml, ImageMeta};
use crate::config::{should_capture, CaptureConfig, Product};
use crate::container::write_container;
use crate::error::DatagenError;
use crate::status::{vehicle_json, world_json, WorldStatusRecord};

/// One manifest line: the frame and every file written for it, keyed by
/// product name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frame_id: u64,
    pub files: BTreeMap<String, String>,
}

pub struct CaptureSession {
    cfg: CaptureConfig,
    manifest: File,
    captures: u64,
}

fn frame_stem(frame_id: u64) -> String {
    format!("{frame_id:06}")
}

impl CaptureSession {
    /// Create the output directory and start a fresh manifest.
    pub fn new(cfg: CaptureConfig) -> Result<Self, DatagenError> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.out_dir).map_err(|e| DatagenError::io(&cfg.out_dir, e))?;
        let manifest_path = cfg.out_dir.join("manifest.jsonl");
        let manifest = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&manifest_path)
            .map_err(|e| DatagenError::io(&manifest_path, e))?;
        Ok(CaptureSession {
            cfg,
            manifest,
            captures: 0,
        })
    }

    pub fn config(&self) -> &CaptureConfig {
        &self.cfg
    }

    pub fn captures(&self) -> u64 {
        self.captures
    }

    pub fn should_capture(&self, tick: u64) -> bool {
        should_capture(tick, self.cfg.every_n)
    }

    /// Write every configured product for one frame and append the
    /// manifest line. On failure all files of this frame are removed.
    pub fn capture(
        &mut self,
        bundle: &FrameBundle,
        enhanced: Option<&ImagePlane>,
        world: Option<&WorldStatusRecord>,
    ) -> Result<ManifestEntry, DatagenError> {
        let mut written: Vec<PathBuf> = Vec::new();
        match self.write_products(bundle, enhanced, world, &mut written) {
            Ok(entry) => {
                let line =
                    serde_json::to_string(&entry).expect("manifest entry serialize");
                let manifest_path = self.cfg.out_dir.join("manifest.jsonl");
                let append = (|| {
                    self.manifest.write_all(line.as_bytes())?;
                    self.manifest.write_all(b"\n")?;
                    self.manifest.flush()
                })();
                if let Err(e) = append {
                    remove_all(&written);
                    return Err(DatagenError::io(manifest_path, e));
                }
                self.captures += 1;
                Ok(entry)
            }
            Err(err) => {
                remove_all(&written);
                Err(err)
            }
        }
    }

    fn write_products(
        &self,
        bundle: &FrameBundle,
        enhanced: Option<&ImagePlane>,
        world: Option<&WorldStatusRecord>,
        written: &mut Vec<PathBuf>,
    ) -> Result<ManifestEntry, DatagenError> {
        let stem = frame_stem(bundle.frame_id);
        let ext = self.cfg.image_format.extension();
        let mut files: BTreeMap<String, String> = BTreeMap::new();

        if self.cfg.products.contains(&Product::Frame) {
            let name = format!("{stem}_frame.{ext}");
            self.save_color(&bundle.rgb, &name, written)?;
            files.insert("frame".into(), name);
        }

        if self.cfg.products.contains(&Product::EnhancedFrame) {
            let plane = enhanced.ok_or(DatagenError::MissingProduct {
                product: "enhanced frame",
            })?;
            if plane.width() != bundle.rgb.width() || plane.height() != bundle.rgb.height() {
                return Err(DatagenError::PairingMismatch {
                    expected_w: bundle.rgb.width(),
                    expected_h: bundle.rgb.height(),
                    got_w: plane.width(),
                    got_h: plane.height(),
                });
            }
            let name = format!("{stem}_enhanced.{ext}");
            self.save_color(plane, &name, written)?;
            files.insert("enhanced_frame".into(), name);
        }

        if self.cfg.products.contains(&Product::Semantic) {
            let name = format!("{stem}_semantic.png");
            let path = self.cfg.out_dir.join(&name);
            let img = GrayImage::from_raw(
                bundle.semantics.width(),
                bundle.semantics.height(),
                bundle.semantics.classes().to_vec(),
            )
            .expect("class buffer length matches dimensions");
            written.push(path.clone());
            img.save(&path)?;
            files.insert("semantic".into(), name);
        }

        if self.cfg.products.contains(&Product::Depth) {
            let name = format!("{stem}_depth.png");
            let path = self.cfg.out_dir.join(&name);
            let depth = bundle.gbuffers.require(GBufferId::SceneDepth)?;
            let samples: Vec<u16> = depth
                .data()
                .iter()
                .map(|&d| (d.clamp(0.0, 1.0) * 65535.0).round() as u16)
                .collect();
            let img: ImageBuffer<Luma<u16>, Vec<u16>> =
                ImageBuffer::from_raw(depth.width(), depth.height(), samples)
                    .expect("depth buffer length matches dimensions");
            written.push(path.clone());
            img.save(&path)?;
            files.insert("depth".into(), name);
        }

        if self.cfg.buffer_container.is_some() {
            let name = format!("{stem}_gbuffers.g2r");
            let path = self.cfg.out_dir.join(&name);
            written.push(path.clone());
            let mut file = File::create(&path).map_err(|e| DatagenError::io(&path, e))?;
            write_container(&bundle.gbuffers, &mut file)
                .and_then(|_| file.flush())
                .map_err(|e| DatagenError::io(&path, e))?;
            files.insert("gbuffers".into(), name);
        }

        if self.cfg.products.contains(&Product::Boxes) {
            let actor_ids = bundle.actor_ids.as_deref().ok_or(
                DatagenError::MissingProduct {
                    product: "actor id map (required for boxes)",
                },
            )?;
            let lidar = bundle.lidar.as_ref().ok_or(DatagenError::MissingProduct {
                product: "lidar scan (required for boxes)",
            })?;
            let records = generate_boxes(
                &bundle.semantics,
                actor_ids,
                lidar,
                bundle.frame_id,
                &self.cfg,
            )?;
            let meta = ImageMeta {
                filename: format!("{stem}_frame.{ext}"),
                width: bundle.semantics.width(),
                height: bundle.semantics.height(),
                depth: 3,
            };
            let name = format!("{stem}_boxes.xml");
            let path = self.cfg.out_dir.join(&name);
            written.push(path.clone());
            fs::write(&path, write_voc_xml(&records, &meta))
                .map_err(|e| DatagenError::io(&path, e))?;
            files.insert("boxes".into(), name);
        }

        if self.cfg.products.contains(&Product::VehicleStatus) {
            let status = bundle.vehicle.as_ref().ok_or(DatagenError::MissingProduct {
                product: "vehicle status",
            })?;
            let name = format!("{stem}_vehicle.json");
            let path = self.cfg.out_dir.join(&name);
            written.push(path.clone());
            fs::write(&path, vehicle_json(status)).map_err(|e| DatagenError::io(&path, e))?;
            files.insert("vehicle_status".into(), name);
        }

        if self.cfg.products.contains(&Product::WorldStatus) {
            let status = world.ok_or(DatagenError::MissingProduct {
                product: "world status",
            })?;
            let name = format!("{stem}_world.json");
            let path = self.cfg.out_dir.join(&name);
            written.push(path.clone());
            fs::write(&path, world_json(status)).map_err(|e| DatagenError::io(&path, e))?;
            files.insert("world_status".into(), name);
        }

        Ok(ManifestEntry {
            frame_id: bundle.frame_id,
            files,
        })
    }

    fn save_color(
        &self,
        plane: &ImagePlane,
        name: &str,
        written: &mut Vec<PathBuf>,
    ) -> Result<(), DatagenError> {
        let path = self.cfg.out_dir.join(name);
        let img = RgbImage::from_raw(plane.width(), plane.height(), plane.to_u8())
            .expect("color buffer length matches dimensions");
        written.push(path.clone());
        img.save(&path)?;
        Ok(())
    }
}

fn remove_all(paths: &[PathBuf]) {
    for path in paths {
        // Cleanup is best effort; the original error is what matters.
        let _ = fs::remove_file(path);
    }
}

/// Parse a manifest back into entries.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DatagenError> {
    let text = fs::read_to_string(path).map_err(|e| DatagenError::io(path, e))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| {
            DatagenError::BadContainer(format!("manifest line {}: {e}", i + 1))
        })?;
        entries.push(entry);
    }
    Ok(entries)
}
