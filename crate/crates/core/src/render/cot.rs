use super::multistep::multistep_steps;
use super::serialize::to_markdown;
use crate::sql::{execute_traced, Group, Phase, Query, SqlError};
use crate::table::Table;
use crate::value::Value;

/// Chain-of-thought exemplar: every step of the multi-step instruction followed
/// by the relation the engine materialized after that clause, ending in the
/// gold answer.
pub fn to_cot(query: &Query, table: &Table) -> Result<String, SqlError> {
    let ex = execute_traced(query, table)?;
    let steps = multistep_steps(query);
    let k = steps.len();
    let mut out = format!("Execution process:\nYou need to execute {k} {}.\n", if k == 1 { "step" } else { "steps" });
    let group_col = query.group_by.as_deref().unwrap_or("");
    for (i, step) in steps.iter().enumerate() {
        out.push_str(&format!("Step {i}: {}\n", step.text));
        if i + 1 == k {
            break;
        }
        let inter = match step.phase {
            Phase::Where => to_markdown(&table.select_rows(&ex.filtered_rows)),
            Phase::GroupBy => group_blocks(table, group_col, ex.groups.as_deref().unwrap_or(&[])),
            Phase::Having => group_blocks(table, group_col, ex.having_groups.as_deref().unwrap_or(&[])),
            Phase::Select => join_values(ex.selected.iter().flatten()),
            _ => join_values(ex.ordered.iter().flatten()),
        };
        out.push_str(&format!("Intermediate results {i}:\n{inter}\n"));
    }
    out.push_str(&format!("Answer: {}", ex.answer.display()));
    Ok(out)
}

fn join_values<'a>(vals: impl Iterator<Item = &'a Value>) -> String {
    vals.map(Value::render).collect::<Vec<_>>().join(",")
}

fn group_blocks(table: &Table, col: &str, groups: &[Group]) -> String {
    if groups.is_empty() {
        return "No groups.".to_string();
    }
    groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let key = g.key.as_ref().map(Value::render).unwrap_or_default();
            format!("Group {k} ({col} is {key}):\n{}", to_markdown(&table.select_rows(&g.rows)))
        })
        .collect::<Vec<_>>()
        .join("\n")
}
