//! Attribute measurements taken from SQL text and the reference evaluator,
//! independent of the analyzer and of execution traces.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tabexec_core::sql::Query;
use tabexec_core::{SqlConfig, Table};

use super::oracle::{evaluate, where_rows};

pub fn tokens(sql: &str) -> Vec<&str> {
    sql.split(' ').collect()
}

pub fn keywords(sql: &str) -> BTreeSet<&'static str> {
    let t = tokens(sql);
    let mut out = BTreeSet::new();
    for (i, w) in t.iter().enumerate() {
        let next = t.get(i + 1).copied();
        match (*w, next) {
            ("select", _) => out.insert("select"),
            ("where", _) => out.insert("where"),
            ("having", _) => out.insert("having"),
            ("group", Some("by")) => out.insert("group by"),
            ("order", Some("by")) => out.insert("order by"),
            _ => false,
        };
    }
    out
}

pub fn calculate_times(sql: &str) -> usize {
    tokens(sql).iter().filter(|w| ["+", "-", "*", "/", "sum", "count", "min", "max", "avg"].contains(w)).count()
}

pub fn filter_times(sql: &str) -> usize {
    tokens(sql).iter().filter(|w| ["=", ">", "<", "!=", "in", "like"].contains(w)).count()
}

pub fn columns_used(sql: &str, table: &Table) -> usize {
    let heads: BTreeSet<&str> = table.headers().collect();
    tokens(sql).into_iter().filter(|w| heads.contains(w)).collect::<BTreeSet<_>>().len()
}

/// Checks one example against every active dimension of `cfg`; returns the
/// failing dimension names.
pub fn violations(sql: &str, q: &Query, table: &Table, cfg: &SqlConfig, answer_rows: &[usize]) -> Vec<&'static str> {
    let mut bad = Vec::new();
    let kw = keywords(sql);
    let k = &cfg.keywords_setting;
    let enabled = |name: &str| match name {
        "select" => k.select,
        "where" => k.where_,
        "group by" => k.group_by,
        "having" => k.having,
        _ => k.order_by,
    };
    if kw.iter().any(|w| !enabled(w)) {
        bad.push("keywords");
    }
    let len = tokens(sql).len();
    let l = &cfg.length_setting;
    if l.is_available && !(if l.value.is_empty() { l.min <= len && len <= l.max } else { l.value.contains(&len) }) {
        bad.push("sql_length");
    }
    let used = columns_used(sql, table);
    let c = &cfg.column_ratio;
    let ratio = used as f64 / table.num_columns() as f64;
    if c.is_available && !(if c.value.is_empty() { c.min <= ratio && ratio <= c.max } else { c.value.contains(&used) }) {
        bad.push("column_ratio");
    }
    let s = &cfg.select_row_ratio;
    if s.is_available {
        let n = where_rows(q, table).map(|r| r.len()).unwrap_or(usize::MAX);
        let ratio = n as f64 / table.num_rows() as f64;
        if !(if s.value.is_empty() { s.min <= ratio && ratio <= s.max } else { s.value.contains(&n) }) {
            bad.push("select_row_ratio");
        }
    }
    if cfg.calculate_times.is_available && !cfg.calculate_times.value.contains(&calculate_times(sql)) {
        bad.push("calculate_times");
    }
    if cfg.filter_times.is_available && !cfg.filter_times.value.contains(&filter_times(sql)) {
        bad.push("filter_times");
    }
    let cells = evaluate(q, table).unwrap_or_default();
    if cells.is_empty() {
        bad.push("empty_answer");
    }
    if let Some(n) = cfg.answer_cells_number {
        if cells.len() != n {
            bad.push("answer_cells_number");
        }
    }
    let a = &cfg.answer_location;
    if a.is_available {
        let m = table.num_rows() as f64;
        if answer_rows.is_empty() || answer_rows.iter().any(|&r| (r as f64 / m) < a.min || (r as f64 / m) > a.max) {
            bad.push("answer_location");
        }
    }
    bad
}
