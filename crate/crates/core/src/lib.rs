//! Synthetic SQL-execution benchmark core.
//!
//! The crate is organised as a pipeline:
//!
//! - [`table`] synthesizes random typed tables from a [`TableConfig`].
//! - [`sql`] parses, renders, analyzes and executes the supported SQL subset.
//!   It is the ground-truth oracle for everything downstream.
//! - [`gen`] samples queries from template libraries and a small grammar, then
//!   keeps or rejects them against a declarative [`SqlConfig`].
//! - [`render`] turns tables and queries into prompts: markdown/flatten
//!   serialization, few-shot assembly, multi-step instructions, chain-of-thought
//!   exemplars and token budgeting.
//!
//! Numeric answers are exact: integer columns stay `i64` and averages are
//! carried as [`Rational`] so that rendered answers never depend on binary
//! floating point.

pub mod gen;
pub mod render;
pub mod seed;
pub mod sql;
pub mod table;
pub mod value;

/// Exact rational scalar used for averages and decimal literals.
pub type Rational = num_rational::Ratio<i64>;

pub use gen::{
    check_constraints, generate_distribution_example, generate_example, instantiate,
    DistributionPattern, Example, GenError, SetName, SqlConfig, Template, TemplateSet, Verdict,
};
pub use render::{
    build_prompt, fit_rows_to_budget, to_cot, to_flatten, to_markdown, to_multistep, Prompt,
    SerializerStyle, TaskStyle, TokenCounter,
};
pub use sql::{analyze, execute, parse, render_sql, row_coverage, Answer, Query, QueryAttributes};
pub use table::{generate_table, ColumnSpec, ColumnType, Lexicon, Table, TableConfig, TableError};
pub use value::Value;
