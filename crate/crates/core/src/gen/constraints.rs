use serde::{Deserialize, Serialize};

use super::config::SqlConfig;
use crate::sql::{analyze, execute_traced, Answer, Query, QueryAttributes};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    /// The constraint dimension that failed, e.g. `"filter_times"` or
    /// `"engine:SubqueryNotScalar"`.
    Reject(String),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject(r) => Some(r),
        }
    }
}

/// What a successful check measured, reused when building the example.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub answer: Answer,
    pub attributes: QueryAttributes,
    pub row_coverage: f64,
    pub filtered_rows: usize,
}

pub fn check_constraints(query: &Query, table: &Table, cfg: &SqlConfig) -> Verdict {
    match check_detailed(query, table, cfg) {
        Ok(_) => Verdict::Accept,
        Err(v) => v,
    }
}

fn reject(reason: &str) -> Verdict {
    Verdict::Reject(reason.to_string())
}

/// Static dimensions first, then execution, then answer-dependent dimensions.
pub fn check_detailed(query: &Query, table: &Table, cfg: &SqlConfig) -> Result<Checked, Verdict> {
    let attrs = analyze(query).with_table_width(table.num_columns());
    if !attrs.keywords.iter().all(|k| cfg.keywords_setting.enabled(*k)) {
        return Err(reject("keywords"));
    }
    if !cfg.nest.contains(&attrs.nest_depth) {
        return Err(reject("nest"));
    }
    if !cfg.length_setting.admits(attrs.sql_length, attrs.sql_length) {
        return Err(reject("sql_length"));
    }
    if !cfg.column_ratio.admits(attrs.columns_used.len(), attrs.column_ratio.unwrap_or(0.0)) {
        return Err(reject("column_ratio"));
    }
    if !cfg.calculate_times.admits(attrs.calculate_times) {
        return Err(reject("calculate_times"));
    }
    if !cfg.filter_times.admits(attrs.filter_times) {
        return Err(reject("filter_times"));
    }

    let ex = match execute_traced(query, table) {
        Ok(ex) => ex,
        Err(e) => return Err(Verdict::Reject(format!("engine:{}", e.name()))),
    };
    let m = table.num_rows();
    let filtered = ex.filtered_rows.len();
    let coverage = if m == 0 { 0.0 } else { filtered as f64 / m as f64 };

    let answer = ex.answer;
    if answer.is_empty() {
        return Err(reject("empty_answer"));
    }
    if let Some(n) = cfg.answer_cells_number {
        if answer.cells.len() != n {
            return Err(reject("answer_cells_number"));
        }
    }
    if !cfg.select_row_ratio.admits(filtered, coverage) {
        return Err(reject("select_row_ratio"));
    }
    let loc = &cfg.answer_location;
    if loc.is_available {
        if answer.sources.iter().any(|s| s.row.is_none()) || m == 0 {
            return Err(reject("answer_location"));
        }
        for s in &answer.sources {
            let r = s.row.expect("checked");
            let ok_row = if loc.row_value.is_empty() {
                let ratio = r as f64 / m as f64;
                loc.min <= ratio && ratio <= loc.max
            } else {
                loc.row_value.contains(&r)
            };
            let ok_col = loc.column_value.is_empty() || s.column.is_some_and(|c| loc.column_value.contains(&c));
            if !ok_row || !ok_col {
                return Err(reject("answer_location"));
            }
        }
    }
    Ok(Checked { answer, attributes: attrs, row_coverage: coverage, filtered_rows: filtered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::config::{AnswerLocation, KeywordsSetting, ListSetting};
    use crate::sql::{parse, Keyword};
    use crate::table::{ColumnSpec, ColumnType};
    use crate::value::Value;

    fn table(rows: usize) -> Table {
        let cols = vec![ColumnSpec::new("k", ColumnType::Text), ColumnSpec::new("n", ColumnType::Int)];
        let rows = (0..rows).map(|i| vec![Value::Text(format!("v{i}")), Value::Int(i as i64)]).collect();
        Table::new(cols, rows).unwrap()
    }

    #[test]
    fn calculate_times_counting() {
        let cfg = SqlConfig { calculate_times: ListSetting::active(vec![2]), ..SqlConfig::default() };
        let q = parse("select sum ( n + n ) from t").unwrap();
        assert_eq!(check_constraints(&q, &table(3), &cfg), Verdict::Accept);
    }

    #[test]
    fn answer_location_bounds() {
        let cfg = SqlConfig { answer_location: AnswerLocation::ratio(0.1, 0.9), ..SqlConfig::default() };
        let q = parse("select n from t where k = 'v0'").unwrap();
        assert_eq!(check_constraints(&q, &table(30), &cfg), Verdict::Reject("answer_location".into()));
        let q = parse("select n from t where k = 'v15'").unwrap();
        assert_eq!(check_constraints(&q, &table(30), &cfg), Verdict::Accept);
    }

    #[test]
    fn keyword_gate() {
        let cfg = SqlConfig { keywords_setting: KeywordsSetting::without(&[Keyword::OrderBy]), ..SqlConfig::default() };
        let q = parse("select k from t order by n desc limit 1").unwrap();
        assert_eq!(check_constraints(&q, &table(3), &cfg), Verdict::Reject("keywords".into()));
    }

    #[test]
    fn engine_errors_reject() {
        let q = parse("select n from t where k = 'zz'").unwrap();
        assert_eq!(check_constraints(&q, &table(3), &SqlConfig::default()), Verdict::Reject("empty_answer".into()));
        let q = parse("select ( select n from t ) > 1").unwrap();
        assert_eq!(
            check_constraints(&q, &table(3), &SqlConfig::default()),
            Verdict::Reject("engine:SubqueryNotScalar".into())
        );
    }
}
