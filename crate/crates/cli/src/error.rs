//! Error classes mapped to fixed exit codes, with an optional JSON form
//! for scripted callers.
//!
//! | code | class   | meaning                                        |
//! |------|---------|------------------------------------------------|
//! | 0    | ok      | command succeeded                              |
//! | 1    | runtime | engine/pipeline/enhancer failed mid-run        |
//! | 2    | usage   | bad arguments or a missing command input       |
//! | 3    | config  | YAML invalid: parse, validation, bad --set     |
//! | 4    | input   | a named input file is missing or malformed     |

use std::path::PathBuf;

use g2r_engine::yamlv::Issue;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration invalid:\n{}", format_issues(.0))]
    Config(Vec<Issue>),
    #[error("bad override '{path}': {detail}")]
    BadOverride { path: String, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {detail}")]
    Input { path: PathBuf, detail: String },
    #[error("{0}")]
    Runtime(String),
}

fn format_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::BadOverride { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Input { .. } => "input",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) | CliError::BadOverride { .. } => 3,
            CliError::Input { .. } => 4,
        }
    }

    /// Machine-readable form for `--json` mode, one object on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let mut error = serde_json::json!({
            "class": self.class(),
            "code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Config(issues) = self {
            error["issues"] = serde_json::Value::Array(
                issues
                    .iter()
                    .map(|i| serde_json::Value::String(i.to_string()))
                    .collect(),
            );
        }
        serde_json::json!({ "error": error })
    }

    pub fn input(path: impl Into<PathBuf>, detail: impl std::fmt::Display) -> Self {
        CliError::Input {
            path: path.into(),
            detail: detail.to_string(),
        }
    }
}

impl From<g2r_pipeline::PipelineError> for CliError {
    fn from(e: g2r_pipeline::PipelineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<g2r_engine::EngineError> for CliError {
    fn from(e: g2r_engine::EngineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<g2r_enhance::EnhanceError> for CliError {
    fn from(e: g2r_enhance::EnhanceError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<g2r_wire::WireError> for CliError {
    fn from(e: g2r_wire::WireError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<g2r_datagen::DatagenError> for CliError {
    fn from(e: g2r_datagen::DatagenError) -> Self {
        match e {
            g2r_datagen::DatagenError::Io { path, source } => CliError::input(path, source),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
