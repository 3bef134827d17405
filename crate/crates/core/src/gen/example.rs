use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SqlConfig;
use super::constraints::{check_detailed, Verdict};
use super::template::{instantiate, SetName, Template, TemplateSet};
use super::GenError;
use crate::seed::GenRng;
use crate::sql::{render_sql, Answer, Query, QueryAttributes};
use crate::table::{generate_table, place_answer_rows, ColumnType, Table, TableConfig};

pub const DEFAULT_MAX_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum DistributionPattern {
    Dense,
    Sparse,
    #[default]
    Unconstrained,
}

/// One accepted query on one table, with everything measured about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub table_seed: u64,
    pub template: String,
    pub reasoning_type: SetName,
    pub sql: String,
    pub query: Query,
    pub answer: Answer,
    pub attributes: QueryAttributes,
    pub row_coverage: f64,
    /// Source rows of the answer cells, in answer order.
    pub answer_rows: Vec<usize>,
    pub distribution: DistributionPattern,
    pub attempts: usize,
    pub rejections: BTreeMap<String, usize>,
}

pub(crate) fn example_id(table_seed: u64) -> String {
    format!("{table_seed:016x}")
}

/// Rejection sampling: draw a satisfiable template, bind it, check it.
pub fn generate_example(
    table: &Table,
    set: &TemplateSet,
    cfg: &SqlConfig,
    rng: &mut GenRng,
    max_attempts: usize,
) -> Result<Example, GenError> {
    let pool: Vec<&Template> = set.filtered(&cfg.include, &cfg.exclude);
    generate_from(table, &pool, set.name, cfg, rng, max_attempts)
}

pub(crate) fn generate_from(
    table: &Table,
    pool: &[&Template],
    set: SetName,
    cfg: &SqlConfig,
    rng: &mut GenRng,
    max_attempts: usize,
) -> Result<Example, GenError> {
    if pool.is_empty() {
        return Err(GenError::ConfigInvalid {
            field: "include".into(),
            message: format!("include/exclude leave no template in set {set}"),
        });
    }
    let usable: Vec<&Template> = pool.iter().copied().filter(|t| t.satisfiable_on(table)).collect();
    if usable.is_empty() {
        return Err(GenError::SlotUnsatisfiable(format!(
            "no template of set {set} fits the table's column types"
        )));
    }
    let mut rejections: BTreeMap<String, usize> = BTreeMap::new();
    for attempt in 1..=max_attempts.max(1) {
        let t = *usable.choose(rng).expect("nonempty");
        let query = match instantiate(t, table, rng) {
            Ok(q) => q,
            Err(GenError::SlotUnsatisfiable(_)) => {
                *rejections.entry("slots".into()).or_default() += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        match check_detailed(&query, table, cfg) {
            Ok(c) => {
                let answer_rows = c.answer.source_rows();
                return Ok(Example {
                    id: example_id(table.seed),
                    table_seed: table.seed,
                    template: t.name.clone(),
                    reasoning_type: set,
                    sql: render_sql(&query),
                    query,
                    answer: c.answer,
                    attributes: c.attributes,
                    row_coverage: c.row_coverage,
                    answer_rows,
                    distribution: DistributionPattern::Unconstrained,
                    attempts: attempt,
                    rejections,
                });
            }
            Err(Verdict::Reject(r)) => *rejections.entry(r).or_default() += 1,
            Err(Verdict::Accept) => unreachable!(),
        }
    }
    Err(GenError::Exhausted { attempts: max_attempts.max(1), histogram: rejections })
}

/// Target rows for `k` answer cells in an `m`-row table.
///
/// Dense rows form one contiguous run. Sparse rows are pairwise at least two
/// apart, and for `k >= 2` the first and last are at least `m / 2` apart.
pub fn choose_rows(pattern: DistributionPattern, m: usize, k: usize, rng: &mut GenRng) -> Result<Vec<usize>, GenError> {
    let infeasible = |why: String| Err(GenError::PatternInfeasible(why));
    if k == 0 || k > m {
        return infeasible(format!("need 1 <= k <= rows, got k={k}, rows={m}"));
    }
    match pattern {
        DistributionPattern::Dense => {
            let start = rng.gen_range(0..=m - k);
            Ok((start..start + k).collect())
        }
        DistributionPattern::Sparse => {
            if k == 1 {
                return Ok(vec![rng.gen_range(0..m)]);
            }
            let min_span = (2 * (k - 1)).max(m.div_ceil(2));
            if min_span > m - 1 {
                return infeasible(format!("{k} sparse rows need a span of {min_span}, table has {m} rows"));
            }
            let span = rng.gen_range(min_span..=m - 1);
            let first = rng.gen_range(0..=m - 1 - span);
            let last = first + span;
            let mut rows = vec![first];
            if k > 2 {
                // k-2 interior rows in [first+2, last-2], pairwise >= 2 apart.
                let slots = span - 3;
                let room = slots - (k - 3);
                let mut picks = rand::seq::index::sample(rng, room, k - 2).into_vec();
                picks.sort_unstable();
                rows.extend(picks.iter().enumerate().map(|(i, p)| first + 2 + p + i));
            }
            rows.push(last);
            Ok(rows)
        }
        DistributionPattern::Unconstrained => {
            let mut rows = rand::seq::index::sample(rng, m, k).into_vec();
            rows.sort_unstable();
            Ok(rows)
        }
    }
}

/// Builds a table whose equality key sits at exactly `k` rows laid out per
/// `pattern`, and the one-filter query that reads those rows back.
pub fn generate_distribution_example(
    table_cfg: &TableConfig,
    cfg: &SqlConfig,
    pattern: DistributionPattern,
    k: usize,
    rng: &mut GenRng,
) -> Result<(Table, Example), GenError> {
    let cfg = SqlConfig { answer_cells_number: Some(k), ..cfg.clone() };
    let mut last = None;
    for _ in 0..50 {
        let table = generate_table(table_cfg, rng.gen())?;
        let m = table.num_rows();
        let rows = choose_rows(pattern, m, k, rng)?;
        let texts = table.columns_of_type(ColumnType::Text);
        let Some(&key_col) = texts.choose(rng) else {
            return Err(GenError::PatternInfeasible("table has no TEXT column to filter on".into()));
        };
        let others: Vec<usize> = (0..table.num_columns())
            .filter(|&c| c != key_col && table.columns[c].ctype != ColumnType::Date)
            .collect();
        let Some(&ans_col) = others.choose(rng) else {
            return Err(GenError::PatternInfeasible("table needs a second TEXT or INT column to select".into()));
        };
        let key_header = table.columns[key_col].header.clone();
        let key_value = table.rows[rows[0]][key_col].clone();
        let placed = place_answer_rows(&table, &key_header, &key_value, &rows)?;
        let t = Template::skeleton(
            SetName::Easy,
            0,
            &format!(
                "select {} from my_table where {key_header} = {}",
                placed.columns[ans_col].header,
                super::template::value_literal(&key_value)
            ),
        );
        let query = instantiate(&t, &placed, rng)?;
        match check_detailed(&query, &placed, &cfg) {
            Ok(c) => {
                let answer_rows = c.answer.source_rows();
                let ex = Example {
                    id: example_id(placed.seed),
                    table_seed: placed.seed,
                    template: if placed.columns[ans_col].ctype == ColumnType::Text { "easy-4" } else { "easy-2" }.into(),
                    reasoning_type: SetName::Easy,
                    sql: render_sql(&query),
                    query,
                    answer: c.answer,
                    attributes: c.attributes,
                    row_coverage: c.row_coverage,
                    answer_rows,
                    distribution: pattern,
                    attempts: 1,
                    rejections: BTreeMap::new(),
                };
                return Ok((placed, ex));
            }
            Err(v) => last = v.reason().map(str::to_string),
        }
    }
    Err(GenError::PatternInfeasible(format!(
        "no {pattern:?} example satisfied the config: {}",
        last.unwrap_or_default()
    )))
}
