use super::prompt::{
    COT_AFTER_TABLE, COT_HEADER, MULTISTEP_AFTER_TABLE, MULTISTEP_HEADER, SQL_AFTER_TABLE, SQL_HEADER,
};
use super::serialize::{serialize, SerializerStyle};
use super::tokens::TokenCounter;
use super::{RenderError, TaskStyle};
use crate::seed::{derive_seed, STREAM_TABLE};
use crate::table::{generate_table, TableConfig};

const PROBE_SEEDS: u64 = 4;
const PROBE_ROWS: [usize; 3] = [64, 16, 4];
/// Typical target-query line, counted once per prompt.
const QUERY_ALLOWANCE: &str = "SQL:select count ( aaaa ) , sum ( bbbb ) from my_table where cccc > 100 group by dddd \nAnswer:";

/// Tokens a zero-shot prompt spends outside the serialized table.
pub fn prompt_overhead(task: TaskStyle, counter: TokenCounter) -> usize {
    let (head, after) = match task {
        TaskStyle::SqlText => (SQL_HEADER, SQL_AFTER_TABLE),
        TaskStyle::MultiStepInstruction => (MULTISTEP_HEADER, MULTISTEP_AFTER_TABLE),
        TaskStyle::ChainOfThought => (COT_HEADER, COT_AFTER_TABLE),
    };
    counter.count(&format!("{head}{after}{QUERY_ALLOWANCE}"))
}

fn mean_table_tokens(cfg: &TableConfig, rows: usize, style: SerializerStyle, counter: TokenCounter) -> Result<f64, RenderError> {
    let cfg = cfg.clone().with_rows(rows);
    let mut total = 0usize;
    for s in 0..PROBE_SEEDS {
        let t = generate_table(&cfg, derive_seed(0x0b5e_55ed, STREAM_TABLE, s))?;
        total += counter.count(&serialize(&t, style).text);
    }
    Ok(total as f64 / PROBE_SEEDS as f64)
}

/// Largest row count whose zero-shot SQL prompt is expected to fit `budget`.
pub fn fit_rows_to_budget(
    cfg: &TableConfig,
    budget: usize,
    style: SerializerStyle,
    counter: TokenCounter,
) -> Result<usize, RenderError> {
    fit_rows_with_overhead(cfg, budget, style, counter, prompt_overhead(TaskStyle::SqlText, counter))
}

/// Per-row cost is the slope between a one-row probe and a larger probe,
/// averaged over a few probe tables.
pub fn fit_rows_with_overhead(
    cfg: &TableConfig,
    budget: usize,
    style: SerializerStyle,
    counter: TokenCounter,
    overhead: usize,
) -> Result<usize, RenderError> {
    let one = mean_table_tokens(cfg, 1, style, counter)?;
    let needed = one + overhead as f64;
    if (budget as f64) < needed {
        return Err(RenderError::BudgetTooSmall { budget, needed: needed.ceil() as usize });
    }
    let mut last = None;
    for m in PROBE_ROWS {
        match mean_table_tokens(cfg, m, style, counter) {
            Ok(big) => {
                let per_row = ((big - one) / (m - 1) as f64).max(f64::MIN_POSITIVE);
                let extra = ((budget as f64 - needed) / per_row).floor();
                return Ok(1 + extra.min(usize::MAX as f64 / 2.0) as usize);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("probe list is not empty"))
}
