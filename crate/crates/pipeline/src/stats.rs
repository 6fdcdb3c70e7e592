//! Run counters the driver publishes at the end of a session. Everything
//! here is cheap to update per frame; heavy percentile math happens once
//! at read time.

use std::time::Duration;

use serde::Serialize;

use crate::preprocess::LaneTimings;

/// Staleness histogram bounds: exact counts for 0..=3 ticks behind, one
/// overflow bucket for 4 or more.
pub const STALENESS_BUCKETS: usize = 5;

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineStats {
    /// "sync" or "async".
    pub mode: &'static str,
    pub ticks_requested: u64,
    pub tick_stride: u64,
    /// Bundles completed by the assembler.
    pub frames_assembled: u64,
    /// Bundles that made it through preprocessing and the enhancer.
    pub frames_enhanced: u64,
    /// Sensor frames discarded for arriving behind the watermark.
    pub late_discarded: u64,
    /// Pending frames evicted before completing.
    pub incomplete_evicted: u64,
    /// Completed bundles dropped because the enhance queue was full.
    pub dropped_oldest: u64,
    /// How far behind the newest seen frame each enhanced frame was,
    /// in ticks. Index 4 is the >=4 overflow bucket.
    pub staleness_buckets: [u64; STALENESS_BUCKETS],
    pub max_staleness: u64,
    pub lane_color_ns: u64,
    pub lane_semantics_ns: u64,
    pub lane_streams_ns: u64,
    pub enhance_ns: u64,
    pub wall_ms: f64,
    /// Simulation ticks advanced per wall second.
    pub sim_fps: f64,
    /// Enhanced frames produced per wall second.
    pub enhanced_fps: f64,
}

impl PipelineStats {
    pub fn record_staleness(&mut self, ticks_behind: u64) {
        let bucket = (ticks_behind as usize).min(STALENESS_BUCKETS - 1);
        self.staleness_buckets[bucket] += 1;
        self.max_staleness = self.max_staleness.max(ticks_behind);
    }

    pub fn add_timings(&mut self, timings: &LaneTimings) {
        self.lane_color_ns += timings.color_ns;
        self.lane_semantics_ns += timings.semantics_ns;
        self.lane_streams_ns += timings.streams_ns;
    }

    /// Close the books: derive the wall-clock rates.
    pub fn finalize(&mut self, wall: Duration, ticks_advanced: u64) {
        let secs = wall.as_secs_f64();
        self.wall_ms = secs * 1e3;
        if secs > 0.0 {
            self.sim_fps = ticks_advanced as f64 / secs;
            self.enhanced_fps = self.frames_enhanced as f64 / secs;
        }
    }

    /// Smallest staleness s such that at least fraction `q` of enhanced
    /// frames were at most s ticks behind. The overflow bucket reports
    /// the observed maximum.
    pub fn staleness_quantile(&self, q: f64) -> u64 {
        let total: u64 = self.staleness_buckets.iter().sum();
        if total == 0 {
            return 0;
        }
        let need = (q * total as f64).ceil() as u64;
        let mut seen = 0;
        for (bucket, &count) in self.staleness_buckets.iter().enumerate() {
            seen += count;
            if seen >= need {
                return if bucket == STALENESS_BUCKETS - 1 {
                    self.max_staleness
                } else {
                    bucket as u64
                };
            }
        }
        self.max_staleness
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}
