//! Offline evaluation: segmentation IoU, cross-set cosine similarity of
//! feature batches, and a throughput benchmark over precision and
//! frame-skip settings.

pub mod bench;
pub mod error;
pub mod features;
pub mod iou;

pub use bench::{
    cell_plan, config_fingerprint, cost_for_frame_ms, fps_benchmark, BenchReport, BenchWorkload,
    CellMetrics, CellOutcome, CellPlan, CellResult,
};
pub use error::EvalError;
pub use features::{
    cosine_pairwise, load_features, read_features, save_features, write_features, FeatureSet,
    FEATURE_MAGIC, FEATURE_VERSION,
};
pub use iou::{iou, IouReport};
