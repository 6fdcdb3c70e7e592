//! Command-line front end: one YAML configuration drives the engine, the
//! pipeline, the enhancer, dataset capture, scenarios and benchmarks.
//!
//! Precedence is file, then `G2R_` environment variables, then `--set`
//! flags. Every default that fills a gap is logged, and validation
//! reports all problems in one pass.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{
    apply_override, dump_config, env_overrides, load_config, parse_set, validate_value,
    CaptureSection, EngineSection, EnhancerKind, EnhancerSection, EvalSection, LoadedConfig,
    MasterConfig, PipelineSection, RunMode,
};
pub use error::CliError;
