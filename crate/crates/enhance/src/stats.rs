//! Per-group color statistics matching: shift each semantic group's color
//! distribution toward a reference profile, channel by channel. A cheap,
//! fully deterministic stand-in for a learned enhancer that still reacts
//! to the semantic layout of the frame.

use g2r_core::{EnhancerInput, ImagePlane, OneHotStack, Precision, GROUP_COUNT};
use serde::{Deserialize, Serialize};

use crate::enhancer::Enhancer;
use crate::error::EnhanceError;

/// Below this, a channel is flat and scaling by std would explode noise;
/// the transform degrades to a pure mean shift.
pub const STD_FLOOR: f32 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f32,
    pub std: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub channels: [ChannelStats; 3],
    /// Sample size behind the estimate.
    pub pixels: u64,
}

/// One reference profile: color statistics per semantic group. Groups the
/// reference imagery never showed stay `None` and pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorStats {
    pub groups: Vec<Option<GroupStats>>,
}

impl ColorStats {
    pub fn empty() -> Self {
        ColorStats {
            groups: vec![None; GROUP_COUNT],
        }
    }

    /// Measure a single image under its one-hot grouping.
    pub fn measure(rgb: &ImagePlane, onehot: &OneHotStack) -> Result<Self, EnhanceError> {
        let mut acc = StatsAccumulator::new();
        acc.observe(rgb, onehot)?;
        Ok(acc.finish())
    }

    pub fn group(&self, g: usize) -> Option<&GroupStats> {
        self.groups.get(g).and_then(|s| s.as_ref())
    }
}

/// Streaming two-pass-free accumulator (sum and sum of squares) usable
/// across many frames to build a reference profile.
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    count: Vec<u64>,
    sum: Vec<[f64; 3]>,
    sum_sq: Vec<[f64; 3]>,
}

impl Default for StatsAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl StatsAccumulator {
    pub fn new() -> Self {
        StatsAccumulator {
            count: vec![0; GROUP_COUNT],
            sum: vec![[0.0; 3]; GROUP_COUNT],
            sum_sq: vec![[0.0; 3]; GROUP_COUNT],
        }
    }

    pub fn observe(&mut self, rgb: &ImagePlane, onehot: &OneHotStack) -> Result<(), EnhanceError> {
        if rgb.channels() != 3 {
            return Err(EnhanceError::WrongChannelCount {
                expected: 3,
                got: rgb.channels(),
            });
        }
        if rgb.width() != onehot.width() || rgb.height() != onehot.height() {
            return Err(EnhanceError::Core(g2r_core::CoreError::DimensionMismatch {
                what: "one-hot stack for stats",
                expected_w: rgb.width(),
                expected_h: rgb.height(),
                actual_w: onehot.width(),
                actual_h: onehot.height(),
            }));
        }
        let pixels = rgb.width() as usize * rgb.height() as usize;
        let data = rgb.data();
        for pix in 0..pixels {
            let g = onehot.group_at(pix);
            self.count[g] += 1;
            for c in 0..3 {
                let v = data[pix * 3 + c] as f64;
                self.sum[g][c] += v;
                self.sum_sq[g][c] += v * v;
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> ColorStats {
        let groups = (0..GROUP_COUNT)
            .map(|g| {
                let n = self.count[g];
                if n == 0 {
                    return None;
                }
                let channels = std::array::from_fn(|c| {
                    let mean = self.sum[g][c] / n as f64;
                    let var = (self.sum_sq[g][c] / n as f64 - mean * mean).max(0.0);
                    ChannelStats {
                        mean: mean as f32,
                        std: var.sqrt() as f32,
                    }
                });
                Some(GroupStats {
                    channels,
                    pixels: n,
                })
            })
            .collect();
        ColorStats { groups }
    }
}

/// Matches each group's per-channel mean and spread to a reference
/// profile: `out = (x - mean_in) / std_in * std_ref + mean_ref`, clamped
/// to [0, 1]. Flat channels (std under `STD_FLOOR`) on either side fall
/// back to a mean shift so the transform never divides by noise.
#[derive(Debug, Clone)]
pub struct StatsMatchEnhancer {
    reference: ColorStats,
}

impl StatsMatchEnhancer {
    pub fn new(reference: ColorStats) -> Result<Self, EnhanceError> {
        if reference.groups.len() != GROUP_COUNT {
            return Err(EnhanceError::ReferenceGroupCount {
                expected: GROUP_COUNT,
                got: reference.groups.len(),
            });
        }
        Ok(StatsMatchEnhancer { reference })
    }

    pub fn reference(&self) -> &ColorStats {
        &self.reference
    }
}

impl Enhancer for StatsMatchEnhancer {
    fn name(&self) -> &str {
        "stats_match"
    }

    fn enhance(&mut self, input: &EnhancerInput) -> Result<ImagePlane, EnhanceError> {
        let measured = ColorStats::measure(&input.rgb, &input.onehot)?;
        let pixels = input.rgb.width() as usize * input.rgb.height() as usize;
        let src = input.rgb.data();
        let mut out = vec![0.0f32; src.len()];

        // Precompute the per-group affine (gain, bias) per channel.
        let transforms: Vec<[(f32, f32); 3]> = (0..GROUP_COUNT)
            .map(|g| {
                std::array::from_fn(|c| {
                    match (measured.group(g), self.reference.group(g)) {
                        (Some(m), Some(r)) => {
                            let m = m.channels[c];
                            let r = r.channels[c];
                            if m.std < STD_FLOOR || r.std < STD_FLOOR {
                                (1.0, r.mean - m.mean)
                            } else {
                                let gain = r.std / m.std;
                                (gain, r.mean - m.mean * gain)
                            }
                        }
                        // No reference for this group: pass through.
                        _ => (1.0, 0.0),
                    }
                })
            })
            .collect();

        for pix in 0..pixels {
            let g = input.onehot.group_at(pix);
            for c in 0..3 {
                let (gain, bias) = transforms[g][c];
                out[pix * 3 + c] = (src[pix * 3 + c] * gain + bias).clamp(0.0, 1.0);
            }
        }
        Ok(ImagePlane::new(
            input.rgb.width(),
            input.rgb.height(),
            3,
            Precision::F32,
            out,
        )?)
    }
}
