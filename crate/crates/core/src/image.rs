//! Normalized image planes and channel-major tensors.
//!
//! All raster data in the pipeline is carried as `f32` samples in `[0, 1]`,
//! regardless of how it travelled on the wire. The [`Precision`] tag records
//! the storage format the samples came from (or are destined for); it never
//! changes the in-memory representation.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Storage precision of a plane's source or destination encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    F32,
    F16,
    U8,
}

impl Precision {
    /// Bytes a single sample occupies in this encoding.
    pub fn bytes_per_sample(self) -> usize {
        match self {
            Precision::F32 => 4,
            Precision::F16 => 2,
            Precision::U8 => 1,
        }
    }
}

/// Interleaved row-major raster: sample (x, y, c) lives at
/// `(y * width + x) * channels + c`.
///
/// Invariants, enforced at construction:
/// * width and height are nonzero,
/// * channels is 1, 2, 3 or 4,
/// * every sample is finite and inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: u32,
    height: u32,
    channels: u8,
    precision: Precision,
    data: Vec<f32>,
}

impl ImagePlane {
    pub fn new(
        width: u32,
        height: u32,
        channels: u8,
        precision: Precision,
        data: Vec<f32>,
    ) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::ZeroDimension { width, height });
        }
        if !(1..=4).contains(&channels) {
            return Err(CoreError::BadChannelCount(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(CoreError::DataLengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        for (index, &value) in data.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(CoreError::SampleOutOfRange { index, value });
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            precision,
            data,
        })
    }

    /// Plane filled with a constant value.
    pub fn splat(
        width: u32,
        height: u32,
        channels: u8,
        precision: Precision,
        value: f32,
    ) -> Result<Self, CoreError> {
        let n = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, precision, vec![value; n])
    }

    /// Decode 8-bit samples as `value / 255`.
    pub fn from_u8(width: u32, height: u32, channels: u8, bytes: &[u8]) -> Result<Self, CoreError> {
        let data = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        Self::new(width, height, channels, Precision::U8, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Sample at (x, y, c); panics if out of bounds, callers index within
    /// the validated dimensions.
    pub fn sample(&self, x: u32, y: u32, c: u8) -> f32 {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        self.data[(y as usize * self.width as usize + x as usize) * self.channels as usize
            + c as usize]
    }

    /// Same raster reinterpreted under a different storage tag.
    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// Encode back to 8-bit with round-half-up on `value * 255`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| (v * 255.0).round() as u8).collect()
    }
}

/// Channel-major tensor: plane c occupies `[c * width * height, (c + 1) * width * height)`.
///
/// This is the layout the enhancer contract expects for per-group G-buffer
/// stacks, where channels from several buffers are concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTensor {
    width: u32,
    height: u32,
    channels: u16,
    data: Vec<f32>,
}

impl PlanarTensor {
    pub fn new(width: u32, height: u32, channels: u16, data: Vec<f32>) -> Result<Self, CoreError> {
        if width == 0 || height == 0 {
            return Err(CoreError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(CoreError::DataLengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Borrow one channel plane.
    pub fn channel(&self, c: u16) -> &[f32] {
        let plane = self.width as usize * self.height as usize;
        &self.data[c as usize * plane..(c as usize + 1) * plane]
    }

    /// Convert an interleaved plane into channel-major order.
    pub fn from_interleaved(plane: &ImagePlane) -> Self {
        let w = plane.width() as usize;
        let h = plane.height() as usize;
        let c = plane.channels() as usize;
        let mut data = vec![0.0f32; w * h * c];
        let src = plane.data();
        for ch in 0..c {
            let dst = &mut data[ch * w * h..(ch + 1) * w * h];
            for (pix, slot) in dst.iter_mut().enumerate() {
                *slot = src[pix * c + ch];
            }
        }
        Self {
            width: plane.width(),
            height: plane.height(),
            channels: c as u16,
            data,
        }
    }
}

/// Bilinear resize with half-pixel sample centers and edge clamping.
///
/// Source coordinates are `(d + 0.5) * extent_src / extent_dst - 0.5`, the
/// convention used by common imaging stacks. When the target size equals the
/// source size the plane is returned bit-identical, no resampling happens.
pub fn resize_bilinear(
    plane: &ImagePlane,
    target_w: u32,
    target_h: u32,
) -> Result<ImagePlane, CoreError> {
    if target_w == 0 || target_h == 0 {
        return Err(CoreError::ZeroDimension {
            width: target_w,
            height: target_h,
        });
    }
    if target_w == plane.width() && target_h == plane.height() {
        return Ok(plane.clone());
    }

    let sw = plane.width() as usize;
    let sh = plane.height() as usize;
    let ch = plane.channels() as usize;
    let scale_x = plane.width() as f64 / target_w as f64;
    let scale_y = plane.height() as f64 / target_h as f64;

    let src = plane.data();
    let mut out = vec![0.0f32; target_w as usize * target_h as usize * ch];

    for dy in 0..target_h as usize {
        let sy = (dy as f64 + 0.5) * scale_y - 0.5;
        let y0 = sy.floor().clamp(0.0, (sh - 1) as f64) as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let fy = (sy - y0 as f64).clamp(0.0, 1.0) as f32;

        for dx in 0..target_w as usize {
            let sx = (dx as f64 + 0.5) * scale_x - 0.5;
            let x0 = sx.floor().clamp(0.0, (sw - 1) as f64) as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let fx = (sx - x0 as f64).clamp(0.0, 1.0) as f32;

            let base = (dy * target_w as usize + dx) * ch;
            for c in 0..ch {
                let p00 = src[(y0 * sw + x0) * ch + c];
                let p01 = src[(y0 * sw + x1) * ch + c];
                let p10 = src[(y1 * sw + x0) * ch + c];
                let p11 = src[(y1 * sw + x1) * ch + c];
                let top = p00 + (p01 - p00) * fx;
                let bot = p10 + (p11 - p10) * fx;
                // Convex blend of in-range samples; clamp only guards float dust.
                out[base + c] = (top + (bot - top) * fy).clamp(0.0, 1.0);
            }
        }
    }

    ImagePlane::new(
        target_w,
        target_h,
        plane.channels(),
        plane.precision(),
        out,
    )
}
