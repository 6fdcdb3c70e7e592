//! Throughput matrix over (precision, frame skip) cells.
//!
//! Each cell boots a fresh in-process engine, drives the synchronous
//! pipeline with an identity enhancer wrapped in the cell's precision
//! regime, and sleeps the simulated per-frame inference cost. Cells run
//! sequentially so their timings never contend for cores. A cell that
//! fails is recorded with its cause and the remaining cells still run.
//!
//! Tick accounting per cell, for stride = skip + 1: the requested tick
//! count is rounded up to a whole number of strides, and the first 10%
//! of ticks (rounded up to a stride boundary) are warmup, excluded from
//! measurement. The measured window therefore spans an exact number of
//! enhance cycles: ceil(window / (skip + 1)).
//!
//! `fps` counts simulation ticks covered by the measured window per wall
//! second, so frame skipping raises it even though each enhance cycle
//! still pays the full inference cost. Latency quantiles are nearest-rank
//! over enhance-to-enhance cycle times inside the window.

use std::time::Instant;

use g2r_core::ClassGrouping;
use g2r_enhance::{
    Calibrator, IdentityEnhancer, Int8Params, PrecisionEmulator, PrecisionMode, SimulatedCost,
};
use g2r_engine::{start_in_process, ServiceOptions, WorldConfig};
use g2r_pipeline::{
    handshake, run_sync, EnhancedFrame, Preprocessor, RequiredSet, ServiceMode, SyncOptions,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::EvalError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchWorkload {
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    pub fixed_dt: f64,
    /// Simulation ticks per cell before warmup rounding.
    pub ticks: u64,
    pub precisions: Vec<PrecisionMode>,
    /// Frames skipped between enhanced frames; 0 enhances every tick.
    pub skips: Vec<u64>,
    pub cost: SimulatedCost,
    /// Frames observed when calibrating int8 cells. Zero makes every
    /// int8 cell fail its calibration.
    pub calibration_frames: u64,
    pub pipeline_depth: usize,
}

impl Default for BenchWorkload {
    fn default() -> Self {
        BenchWorkload {
            width: 96,
            height: 54,
            seed: 7,
            fixed_dt: 0.05,
            ticks: 40,
            precisions: vec![PrecisionMode::F32, PrecisionMode::F16Emulated],
            skips: vec![0, 1, 3],
            cost: SimulatedCost::default(),
            calibration_frames: 4,
            pipeline_depth: 2,
        }
    }
}

/// Cost model whose sleep at the given frame size is `ms` milliseconds
/// for f32 inference.
pub fn cost_for_frame_ms(ms: f64, width: u32, height: u32) -> SimulatedCost {
    let mpix = width as f64 * height as f64 / 1.0e6;
    SimulatedCost {
        base_ms_per_mpixel: ms / mpix,
    }
}

/// Normalized per-cell tick accounting. The window always divides into
/// whole enhance cycles, so `window_frames * stride == window_ticks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellPlan {
    pub stride: u64,
    pub total_ticks: u64,
    pub warmup_ticks: u64,
    pub window_ticks: u64,
    pub total_frames: u64,
    pub warmup_frames: u64,
    pub window_frames: u64,
}

pub fn cell_plan(ticks: u64, skip: u64) -> CellPlan {
    let stride = skip + 1;
    let total_frames = ticks.div_ceil(stride).max(1);
    let total_ticks = total_frames * stride;
    let warmup_frames = total_ticks.div_ceil(10).div_ceil(stride);
    let warmup_ticks = warmup_frames * stride;
    CellPlan {
        stride,
        total_ticks,
        warmup_ticks,
        window_ticks: total_ticks - warmup_ticks,
        total_frames,
        warmup_frames,
        window_frames: total_frames - warmup_frames,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellMetrics {
    /// Simulation ticks per wall second over the measured window.
    pub fps: f64,
    pub p50_latency_s: f64,
    pub p99_latency_s: f64,
    /// Enhance cycles inside the measured window.
    pub inferences: u64,
    pub window_ticks: u64,
    pub total_ticks: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Ok {
        #[serde(flatten)]
        metrics: CellMetrics,
    },
    Failed {
        cause: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub precision: PrecisionMode,
    pub skip: u64,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    /// SHA-256 of the workload's canonical JSON form; two reports with
    /// the same fingerprint measured the same configuration.
    pub fingerprint: String,
    pub workload: BenchWorkload,
    pub cells: Vec<CellResult>,
}

impl BenchReport {
    pub fn cell(&self, precision: PrecisionMode, skip: u64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.precision == precision && c.skip == skip)
    }

    pub fn metrics(&self, precision: PrecisionMode, skip: u64) -> Option<&CellMetrics> {
        match self.cell(precision, skip) {
            Some(CellResult {
                outcome: CellOutcome::Ok { metrics },
                ..
            }) => Some(metrics),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "precision,skip,status,fps,p50_latency_s,p99_latency_s,inferences,window_ticks,total_ticks,cause\n",
        );
        for cell in &self.cells {
            let precision = cell.precision.name();
            let skip = cell.skip;
            match &cell.outcome {
                CellOutcome::Ok { metrics: m } => {
                    out.push_str(&format!(
                        "{precision},{skip},ok,{:.3},{:.6},{:.6},{},{},{},\n",
                        m.fps,
                        m.p50_latency_s,
                        m.p99_latency_s,
                        m.inferences,
                        m.window_ticks,
                        m.total_ticks
                    ));
                }
                CellOutcome::Failed { cause } => {
                    out.push_str(&format!(
                        "{precision},{skip},failed,,,,,,,{}\n",
                        csv_field(cause)
                    ));
                }
            }
        }
        out
    }
}

fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

pub fn config_fingerprint(workload: &BenchWorkload) -> String {
    let canonical = serde_json::to_vec(workload).expect("workload serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Measure the full precision-by-skip matrix. Workload-level mistakes
/// (an empty matrix, too few ticks to leave a window) fail fast; faults
/// inside one cell are recorded on that cell and the sweep continues.
pub fn fps_benchmark(workload: &BenchWorkload) -> Result<BenchReport, EvalError> {
    if workload.precisions.is_empty() || workload.skips.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    if workload.pipeline_depth == 0 {
        return Err(EvalError::BadWorkload(
            "pipeline depth must be at least 1".into(),
        ));
    }
    for &skip in &workload.skips {
        if cell_plan(workload.ticks, skip).window_frames == 0 {
            return Err(EvalError::ZeroWindow {
                ticks: workload.ticks,
                skip,
            });
        }
    }
    let fingerprint = config_fingerprint(workload);
    let mut cells = Vec::new();
    for &precision in &workload.precisions {
        for &skip in &workload.skips {
            let outcome = match run_cell(workload, precision, skip) {
                Ok(metrics) => CellOutcome::Ok { metrics },
                Err(cause) => CellOutcome::Failed { cause },
            };
            cells.push(CellResult {
                precision,
                skip,
                outcome,
            });
        }
    }
    Ok(BenchReport {
        fingerprint,
        workload: workload.clone(),
        cells,
    })
}

fn world_config(workload: &BenchWorkload) -> WorldConfig {
    WorldConfig {
        seed: workload.seed,
        width: workload.width,
        height: workload.height,
        fixed_dt: workload.fixed_dt,
        ..WorldConfig::default()
    }
}

fn run_cell(
    workload: &BenchWorkload,
    precision: PrecisionMode,
    skip: u64,
) -> Result<CellMetrics, String> {
    let plan = cell_plan(workload.ticks, skip);
    let int8 = match precision {
        PrecisionMode::Int8Emulated => Some(calibrate(workload)?),
        _ => None,
    };
    let mut enhancer = PrecisionEmulator::new(
        Box::new(IdentityEnhancer),
        precision,
        int8,
        Some(workload.cost),
    )
    .map_err(|e| e.to_string())?;

    let (mut tx, mut rx, server) = start_in_process(world_config(workload), ServiceOptions::default());
    let required = RequiredSet::standard();
    handshake(
        tx.as_mut(),
        rx.as_mut(),
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .map_err(|e| e.to_string())?;
    let preprocessor = Preprocessor::new(ClassGrouping::standard(), workload.width, workload.height);

    let mut stamps: Vec<Instant> = Vec::with_capacity(plan.total_frames as usize);
    let mut on_frame = |_frame: EnhancedFrame| -> Result<(), String> {
        stamps.push(Instant::now());
        Ok(())
    };
    run_sync(
        tx.as_mut(),
        rx.as_mut(),
        &required,
        &preprocessor,
        &mut enhancer,
        &SyncOptions {
            ticks: plan.total_frames,
            pipeline_depth: workload.pipeline_depth,
            tick_stride: plan.stride,
        },
        &mut on_frame,
    )
    .map_err(|e| e.to_string())?;
    drop(tx);
    drop(rx);
    server.join().map_err(|e| e.to_string())?;

    metrics_from(&plan, &stamps)
}

/// Sweep a short identity run and fit int8 scales to the activations it
/// saw, the usual post-training calibration pass.
fn calibrate(workload: &BenchWorkload) -> Result<Int8Params, String> {
    let (mut tx, mut rx, server) = start_in_process(world_config(workload), ServiceOptions::default());
    let required = RequiredSet::standard();
    handshake(
        tx.as_mut(),
        rx.as_mut(),
        required.subscriptions(),
        ServiceMode::Sync,
    )
    .map_err(|e| e.to_string())?;
    let preprocessor = Preprocessor::new(ClassGrouping::standard(), workload.width, workload.height);

    let mut calibrator = Calibrator::new();
    let mut enhancer = IdentityEnhancer;
    let mut on_frame = |frame: EnhancedFrame| -> Result<(), String> {
        calibrator
            .observe(&frame.input.rgb)
            .map_err(|e| e.to_string())
    };
    run_sync(
        tx.as_mut(),
        rx.as_mut(),
        &required,
        &preprocessor,
        &mut enhancer,
        &SyncOptions {
            ticks: workload.calibration_frames,
            pipeline_depth: workload.pipeline_depth,
            tick_stride: 1,
        },
        &mut on_frame,
    )
    .map_err(|e| e.to_string())?;
    drop(tx);
    drop(rx);
    server.join().map_err(|e| e.to_string())?;
    calibrator.finish().map_err(|e| e.to_string())
}

fn metrics_from(plan: &CellPlan, stamps: &[Instant]) -> Result<CellMetrics, String> {
    if stamps.len() as u64 != plan.total_frames {
        return Err(format!(
            "expected {} enhanced frames, saw {}",
            plan.total_frames,
            stamps.len()
        ));
    }
    // warmup_frames >= 1 always (10% of at least one tick rounds up), so
    // the anchor below exists and the window excludes the cold start.
    let first = plan.warmup_frames as usize;
    let anchor = stamps[first - 1];
    let window = &stamps[first..];
    let elapsed = window
        .last()
        .expect("window_frames >= 1 checked at workload validation")
        .duration_since(anchor)
        .as_secs_f64()
        .max(1.0e-9);
    let mut gaps: Vec<f64> = Vec::with_capacity(window.len());
    let mut prev = anchor;
    for &stamp in window {
        gaps.push(stamp.duration_since(prev).as_secs_f64());
        prev = stamp;
    }
    gaps.sort_unstable_by(|a, b| a.partial_cmp(b).expect("gaps are finite"));
    Ok(CellMetrics {
        fps: plan.window_ticks as f64 / elapsed,
        p50_latency_s: quantile(&gaps, 0.5),
        p99_latency_s: quantile(&gaps, 0.99),
        inferences: plan.window_frames,
        window_ticks: plan.window_ticks,
        total_ticks: plan.total_ticks,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
