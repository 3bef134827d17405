//! Query generation: template libraries, the General grammar, and the
//! rejection-sampling loop that keeps queries satisfying a [`SqlConfig`].

pub mod config;
pub mod constraints;
pub mod dataset;
pub mod example;
pub mod grammar;
pub mod template;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::table::TableError;

pub use config::{AnswerLocation, KeywordsSetting, ListSetting, RangeSetting, SqlConfig};
pub use constraints::{check_constraints, check_detailed, Checked, Verdict};
pub use dataset::{generate_dataset, partition_templates, table_seed, DatasetOptions, DatasetStats, Split};
pub use example::{
    choose_rows, generate_distribution_example, generate_example, DistributionPattern, Example, DEFAULT_MAX_ATTEMPTS,
};
pub use template::{instantiate, instantiate_text, value_literal, SetName, Template, TemplateKind, TemplateSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("SlotUnsatisfiable: {0}")]
    SlotUnsatisfiable(String),
    #[error("Exhausted after {attempts} attempts; rejections: {}", fmt_histogram(histogram))]
    Exhausted { attempts: usize, histogram: BTreeMap<String, usize> },
    #[error("PatternInfeasible: {0}")]
    PatternInfeasible(String),
    #[error("ConfigInvalid: `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("template error: {0}")]
    Template(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("example {index}: {source}")]
    AtIndex { index: usize, source: Box<GenError> },
}

fn fmt_histogram(h: &BTreeMap<String, usize>) -> String {
    let mut v: Vec<(&String, &usize)> = h.iter().collect();
    v.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    v.iter().map(|(k, n)| format!("{k}={n}")).collect::<Vec<_>>().join(", ")
}
