//! Scoring and analysis for benchmark runs.
//!
//! [`metrics`] defines the exact-match normalizer, [`stats`] the correlation
//! coefficients, [`client`] and [`runner`] drive a model endpoint over a
//! dataset, and [`report`] and [`curve`] aggregate the scored records.

pub mod client;
pub mod curve;
pub mod metrics;
pub mod report;
pub mod runner;
pub mod stats;

pub use client::{CallError, Client, Completion, HttpClient, MockClient, ModelEndpoint};
pub use curve::{position_curve, CurveMode, CurvePoint};
pub use metrics::{exact_match, extract_answer, normalize, Cell};
pub use report::{split_report, Bucket, Report, ReportError, LONG_CONTEXT_MAX, SHORT_CONTEXT_MAX};
pub use runner::{run_eval, EvalItem, EvalRecord, HarnessError};
pub use stats::{kendall_tau, pearson, StatsError};
