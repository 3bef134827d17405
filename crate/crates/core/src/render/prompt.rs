use serde::{Deserialize, Serialize};

use super::cot::to_cot;
use super::multistep::to_multistep;
use super::serialize::{serialize, values_markdown, SerializerStyle};
use super::tokens::TokenCounter;
use super::RenderError;
use crate::sql::{execute, render_sql, typecheck, Answer, Query, SqlError};
use crate::table::Table;

pub const SQL_HEADER: &str = "You are an SQL executor, you need to execute SQL based on the give table and SQL statement to obtain the execution results.\nOnly give me the execution results and do not output any other words.\nTable:\n";
pub const SQL_AFTER_TABLE: &str = "\nNow you need to execute SQL based on the given table and SQL statement to obtain the execution result.\nOnly give me the result and do not output any other words or SQL statement.\n";
pub const MULTISTEP_HEADER: &str = "You need to obtain the final answer based on the table and instructions.\nOnly give me the result and do not output any other words.\nTable:\n";
pub const MULTISTEP_AFTER_TABLE: &str = "\nNow you need to get the answer based on the instruction, only give me the result and do not output any other words.\n";
pub const COT_HEADER: &str = "You are an SQL executor, you need to output the execution process and final answer based on table and SQL.\nTable:\n";
pub const COT_AFTER_TABLE: &str = "\nNow you need to get the answer based on the instruction, only give me the intermedium results and the final answer.\n";
pub const FEW_SHOT_INTRO: &str = "The following are some examples.\n\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum TaskStyle {
    #[default]
    #[serde(rename = "sql")]
    SqlText,
    #[serde(rename = "multistep")]
    MultiStepInstruction,
    #[serde(rename = "cot")]
    ChainOfThought,
}

impl TaskStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskStyle::SqlText => "sql",
            TaskStyle::MultiStepInstruction => "multistep",
            TaskStyle::ChainOfThought => "cot",
        }
    }
}

/// Where one gold cell sits inside the serialized table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerPosition {
    /// Token index relative to the start of the serialized table.
    pub token_index: usize,
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    pub style: SerializerStyle,
    pub task_style: TaskStyle,
    pub shots: usize,
    pub token_count: usize,
    /// Tokens before the serialized table.
    pub table_token_offset: usize,
    pub table_token_count: usize,
    pub answer_positions: Vec<AnswerPosition>,
}

/// Text of a shot answer: bare for one cell, a markdown table for several.
pub fn shot_answer(answer: &Answer) -> String {
    if answer.cells.len() == 1 {
        answer.cells[0].render()
    } else {
        let rows: Vec<Vec<_>> = answer.rows().map(|r| r.to_vec()).collect();
        format!("\n{}\n", values_markdown(&answer.columns, &rows))
    }
}

fn check_shared(table: &Table, q: &Query) -> Result<(), RenderError> {
    match typecheck(q, table) {
        Err(SqlError::ColumnNotFound(c)) => Err(RenderError::SharedTableViolation(format!(
            "`{}` references column `{c}` absent from the table",
            render_sql(q)
        ))),
        Err(e) => Err(RenderError::Sql(e)),
        Ok(()) => Ok(()),
    }
}

/// Assembles a prompt: instruction header, one serialized table shared by
/// every shot, the shots, then the target with an open `Answer:`.
pub fn build_prompt(
    table: &Table,
    examples: &[(Query, Answer)],
    target: &Query,
    style: SerializerStyle,
    task: TaskStyle,
    counter: TokenCounter,
) -> Result<Prompt, RenderError> {
    for (q, _) in examples {
        check_shared(table, q)?;
    }
    check_shared(table, target)?;
    let gold = execute(target, table)?;
    let serialized = serialize(table, style);

    let (header, after) = match task {
        TaskStyle::SqlText => (SQL_HEADER, SQL_AFTER_TABLE),
        TaskStyle::MultiStepInstruction => (MULTISTEP_HEADER, MULTISTEP_AFTER_TABLE),
        TaskStyle::ChainOfThought => (COT_HEADER, COT_AFTER_TABLE),
    };
    let mut text = String::with_capacity(serialized.text.len() + 1024);
    text.push_str(header);
    let table_start = text.len();
    text.push_str(&serialized.text);
    text.push_str(after);
    if !examples.is_empty() && task != TaskStyle::ChainOfThought {
        text.push_str(FEW_SHOT_INTRO);
    }
    for (q, a) in examples {
        match task {
            TaskStyle::SqlText => {
                let ans = shot_answer(a);
                text.push_str(&format!("SQL:{}\nAnswer:{ans}", render_sql(q)));
                text.push('\n');
            }
            TaskStyle::MultiStepInstruction => {
                text.push_str(&format!("Instruction:{}\nAnswer:{}\n\n", to_multistep(q), a.display()));
            }
            TaskStyle::ChainOfThought => {
                text.push_str(&format!("SQL:\n{}\n{}\n\n", render_sql(q), to_cot(q, table)?));
            }
        }
    }
    match task {
        TaskStyle::SqlText => text.push_str(&format!("SQL:{}\nAnswer:", render_sql(target))),
        TaskStyle::MultiStepInstruction => text.push_str(&format!("Instruction:{}\nAnswer:", to_multistep(target))),
        TaskStyle::ChainOfThought => text.push_str(&format!("SQL:\n{}\nExecution process:", render_sql(target))),
    }

    let mut answer_positions = Vec::new();
    for src in &gold.sources {
        let Some(row) = src.row else { continue };
        let offset = match src.column {
            Some(c) => serialized.cell_offsets[row][c],
            None => serialized.cell_offsets[row].first().copied().unwrap_or(serialized.row_offsets[row]),
        };
        answer_positions.push(AnswerPosition { token_index: counter.token_index_at(&serialized.text, offset), row });
    }

    Ok(Prompt {
        token_count: counter.count(&text),
        table_token_offset: counter.count(&text[..table_start]),
        table_token_count: counter.count(&serialized.text),
        text,
        style,
        task_style: task,
        shots: examples.len(),
        answer_positions,
    })
}
