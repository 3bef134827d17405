//! Library side of the `tabexec` binary: config loading, dataset files and
//! the commands themselves.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod fsutil;

pub use commands::{cmd_correlate, cmd_eval, cmd_exec, cmd_report, EvalRequest};
pub use config::GenConfig;
pub use dataset::{cmd_gen, cmd_validate, DatasetLine, GenRequest, RunManifest};
pub use error::CliError;
