//! Serialization and prompt construction.

pub mod budget;
pub mod cot;
pub mod multistep;
pub mod prompt;
pub mod serialize;
pub mod tokens;

use thiserror::Error;

use crate::sql::SqlError;
use crate::table::TableError;

pub use budget::{fit_rows_to_budget, fit_rows_with_overhead, prompt_overhead};
pub use cot::to_cot;
pub use multistep::{multistep_steps, to_multistep, Step};
pub use prompt::{build_prompt, shot_answer, AnswerPosition, Prompt, TaskStyle};
pub use serialize::{parse_markdown, serialize, to_flatten, to_markdown, values_markdown, Serialized, SerializerStyle};
pub use tokens::TokenCounter;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("SharedTableViolation: {0}")]
    SharedTableViolation(String),
    #[error("BudgetTooSmall: budget {budget} is below the {needed} tokens of a one-row prompt")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error(transparent)]
    Table(#[from] TableError),
}
