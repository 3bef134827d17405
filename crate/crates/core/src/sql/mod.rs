//! The SQL subset: parser, canonical printer, static analysis and executor.
//!
//! Clauses run in the fixed order FROM, WHERE, GROUP BY, HAVING, SELECT,
//! ORDER BY, LIMIT. Grouped output is ordered by group key, and when a query
//! holds exactly one `max`/`min` call its bare columns read from the row that
//! attains the extreme; otherwise from the group's first row.

pub mod analyze;
pub mod ast;
pub mod exec;
pub mod parser;
pub mod print;

use thiserror::Error;

pub use analyze::{analyze, Keyword, QueryAttributes};
pub use ast::{AggFunc, BinOp, Direction, Expr, InList, Literal, OrderBy, Query};
pub use exec::{
    display_cells, execute, execute_traced, like_match, row_coverage, typecheck, Answer, CellSource,
    Execution, Group, Phase,
};
pub use parser::{parse, parse_expr};
pub use print::{quote, render_expr, render_literal, render_sql};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SqlError {
    #[error("SyntaxError at byte {position}: expected {}, found {found}", expected.join(" or "))]
    SyntaxError { position: usize, expected: Vec<String>, found: String },
    #[error("UnsupportedFeature: {0}")]
    UnsupportedFeature(String),
    #[error("ColumnNotFound: {0}")]
    ColumnNotFound(String),
    #[error("TypeMismatch: {0}")]
    TypeMismatch(String),
    #[error("SubqueryNotScalar: subquery returned {cells} cells")]
    SubqueryNotScalar { cells: usize },
    #[error("DivisionByZero")]
    DivisionByZero,
    #[error("EmptyAggregateInput: {0} over zero rows")]
    EmptyAggregateInput(String),
    #[error("Overflow: integer arithmetic overflowed")]
    Overflow,
}

impl SqlError {
    pub(crate) fn syntax(position: usize, expected: &[&str], found: &str) -> SqlError {
        SqlError::SyntaxError {
            position,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SqlError::SyntaxError { .. } => "SyntaxError",
            SqlError::UnsupportedFeature(_) => "UnsupportedFeature",
            SqlError::ColumnNotFound(_) => "ColumnNotFound",
            SqlError::TypeMismatch(_) => "TypeMismatch",
            SqlError::SubqueryNotScalar { .. } => "SubqueryNotScalar",
            SqlError::DivisionByZero => "DivisionByZero",
            SqlError::EmptyAggregateInput(_) => "EmptyAggregateInput",
            SqlError::Overflow => "Overflow",
        }
    }
}
