//! Batch stages around `posterkit-core`: configuration, JSONL manifests,
//! the external vision-language model client with its response cache, and
//! deterministic parallel execution.
//!
//! Every stage reads one input manifest (forge reads none), writes its
//! outputs into a staging directory, and renames it into place only when the
//! whole stage succeeded.

pub mod config;
pub mod manifest;
pub mod output;
pub mod report;
pub mod stages;
pub mod vlm;

pub use config::{Stage, StageConfig};
pub use report::RunReport;
pub use stages::run_stage;
