//! Reduced-precision emulation for the enhancement path. No accelerated
//! kernels exist here, so lower precision cannot make anything faster by
//! itself; instead the numeric effect is reproduced exactly (values are
//! rounded through f16 or symmetric int8) and the speed effect is modeled
//! by a simulated per-frame cost with published scaling factors.

use std::time::Duration;

use g2r_core::{EnhancerInput, ImagePlane, Precision};
use half::f16;
use serde::{Deserialize, Serialize};

use crate::enhancer::Enhancer;
use crate::error::EnhanceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    F32,
    F16Emulated,
    Int8Emulated,
}

impl PrecisionMode {
    pub fn name(self) -> &'static str {
        match self {
            PrecisionMode::F32 => "f32",
            PrecisionMode::F16Emulated => "f16_emulated",
            PrecisionMode::Int8Emulated => "int8_emulated",
        }
    }

    /// Relative per-frame compute cost against f32. Mirrors the typical
    /// speedup order of real inference backends: half precision roughly
    /// doubles throughput, int8 gains a further ~25%.
    pub fn cost_factor(self) -> f64 {
        match self {
            PrecisionMode::F32 => 1.0,
            PrecisionMode::F16Emulated => 0.5,
            PrecisionMode::Int8Emulated => 0.375,
        }
    }
}

/// Round every sample through IEEE half precision.
pub fn f16_round_trip(plane: &ImagePlane) -> Result<ImagePlane, EnhanceError> {
    let data = plane
        .data()
        .iter()
        .map(|&v| f16::from_f32(v).to_f32())
        .collect();
    Ok(ImagePlane::new(
        plane.width(),
        plane.height(),
        plane.channels(),
        Precision::F16,
        data,
    )?)
}

/// Symmetric per-channel int8 parameters: `q = round(x / scale)` clamped
/// to [-127, 127], reconstructed as `q * scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Int8Params {
    pub scales: [f32; 3],
}

impl Int8Params {
    /// Worst-case absolute reconstruction error for values inside the
    /// calibrated range: half a quantization step.
    pub fn error_bound(&self, channel: usize) -> f32 {
        self.scales[channel] / 2.0
    }
}

pub fn quantize_int8(value: f32, scale: f32) -> i8 {
    if scale <= 0.0 {
        return 0;
    }
    (value / scale).round().clamp(-127.0, 127.0) as i8
}

pub fn dequantize_int8(q: i8, scale: f32) -> f32 {
    q as f32 * scale
}

/// Quantize and reconstruct a 3-channel plane.
pub fn int8_round_trip(
    plane: &ImagePlane,
    params: &Int8Params,
) -> Result<ImagePlane, EnhanceError> {
    if plane.channels() != 3 {
        return Err(EnhanceError::WrongChannelCount {
            expected: 3,
            got: plane.channels(),
        });
    }
    let data = plane
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let scale = params.scales[i % 3];
            dequantize_int8(quantize_int8(v, scale), scale).clamp(0.0, 1.0)
        })
        .collect();
    // The reconstruction lives on the int8 grid but the values themselves
    // are arbitrary f32 multiples of the scale, so the plane stays f32.
    Ok(ImagePlane::new(
        plane.width(),
        plane.height(),
        3,
        Precision::F32,
        data,
    )?)
}

/// Collects per-channel activation ranges over representative frames, the
/// way post-training quantization sweeps a calibration set.
#[derive(Debug, Clone, Default)]
pub struct Calibrator {
    max_abs: [f32; 3],
    frames: u64,
}

impl Calibrator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, plane: &ImagePlane) -> Result<(), EnhanceError> {
        if plane.channels() != 3 {
            return Err(EnhanceError::WrongChannelCount {
                expected: 3,
                got: plane.channels(),
            });
        }
        for (i, &v) in plane.data().iter().enumerate() {
            let c = i % 3;
            self.max_abs[c] = self.max_abs[c].max(v.abs());
        }
        self.frames += 1;
        Ok(())
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    /// Finish calibration: scale maps the observed extreme onto the last
    /// integer step. A channel that stayed all-zero gets the smallest
    /// usable scale instead of zero so quantization stays invertible.
    pub fn finish(&self) -> Result<Int8Params, EnhanceError> {
        if self.frames == 0 {
            return Err(EnhanceError::EmptyCalibration);
        }
        let scales = std::array::from_fn(|c| {
            let m = self.max_abs[c];
            if m > 0.0 {
                m / 127.0
            } else {
                f32::MIN_POSITIVE
            }
        });
        Ok(Int8Params { scales })
    }
}

/// Synthetic per-frame workload: milliseconds per megapixel at f32,
/// scaled by the precision cost factor. Benchmarks sleep this long to
/// stand in for a real network's inference time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedCost {
    pub base_ms_per_mpixel: f64,
}

impl Default for SimulatedCost {
    fn default() -> Self {
        SimulatedCost {
            base_ms_per_mpixel: 4.0,
        }
    }
}

impl SimulatedCost {
    pub fn frame_cost(&self, width: u32, height: u32, mode: PrecisionMode) -> Duration {
        let mpix = width as f64 * height as f64 / 1.0e6;
        let ms = self.base_ms_per_mpixel * mpix * mode.cost_factor();
        Duration::from_secs_f64(ms / 1000.0)
    }
}

/// Wraps an enhancer in a precision regime: inputs are rounded to the
/// target precision before inference and the output is rounded after,
/// emulating a converted network. Optionally burns the simulated cost.
pub struct PrecisionEmulator {
    inner: Box<dyn Enhancer>,
    mode: PrecisionMode,
    int8: Option<Int8Params>,
    cost: Option<SimulatedCost>,
    name: String,
}

impl PrecisionEmulator {
    pub fn new(
        inner: Box<dyn Enhancer>,
        mode: PrecisionMode,
        int8: Option<Int8Params>,
        cost: Option<SimulatedCost>,
    ) -> Result<Self, EnhanceError> {
        if mode == PrecisionMode::Int8Emulated && int8.is_none() {
            return Err(EnhanceError::NotCalibrated);
        }
        let name = format!("{}[{}]", inner.name(), mode.name());
        Ok(PrecisionEmulator {
            inner,
            mode,
            int8,
            cost,
            name,
        })
    }

    pub fn mode(&self) -> PrecisionMode {
        self.mode
    }

    fn round(&self, plane: &ImagePlane) -> Result<ImagePlane, EnhanceError> {
        match self.mode {
            PrecisionMode::F32 => Ok(plane.clone()),
            PrecisionMode::F16Emulated => f16_round_trip(plane),
            PrecisionMode::Int8Emulated => {
                let params = self.int8.as_ref().expect("checked at construction");
                int8_round_trip(plane, params)
            }
        }
    }
}

impl Enhancer for PrecisionEmulator {
    fn name(&self) -> &str {
        &self.name
    }

    fn enhance(&mut self, input: &EnhancerInput) -> Result<ImagePlane, EnhanceError> {
        let rounded_rgb = self.round(&input.rgb)?;
        let staged = EnhancerInput {
            frame_id: input.frame_id,
            rgb: rounded_rgb,
            onehot: input.onehot.clone(),
            streams: input.streams.clone(),
        };
        let out = self.inner.enhance(&staged)?;
        let out = self.round(&out)?;
        if let Some(cost) = self.cost {
            std::thread::sleep(cost.frame_cost(out.width(), out.height(), self.mode));
        }
        Ok(out)
    }
}
