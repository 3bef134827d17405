#![allow(dead_code)]

pub mod measure;
pub mod oracle;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use tabexec_core::render::parse_markdown;
use tabexec_core::seed::GenRng;
use tabexec_core::{ColumnType, SetName, Table, TableConfig, Template, TemplateSet};

pub fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn fixture_table(name: &str) -> Table {
    parse_markdown(&fixture(name)).expect("fixture parses")
}

/// Every set built from fixed skeletons, plus the General productions.
pub fn library() -> Vec<TemplateSet> {
    [
        SetName::Easy,
        SetName::Filter,
        SetName::Aggregate,
        SetName::Arithmetic,
        SetName::Superlative,
        SetName::Comparative,
        SetName::Group,
        SetName::Count,
        SetName::WhereCondition,
        SetName::General,
    ]
    .into_iter()
    .map(TemplateSet::named)
    .collect()
}

/// A `width`-column type layout that fits the template, in random order.
pub fn layout_for(t: &Template, width: usize, rng: &mut GenRng) -> Vec<ColumnType> {
    let (texts, ints) = t.column_demand();
    assert!(texts + ints <= width, "{} needs {texts}+{ints} columns", t.name);
    let mut cols = vec![ColumnType::Text; texts];
    cols.extend(vec![ColumnType::Int; ints]);
    while cols.len() < width {
        cols.push(*ColumnType::ALL.choose(rng).unwrap());
    }
    cols.shuffle(rng);
    cols
}

pub fn small_config(rows: usize, layout: Vec<ColumnType>) -> TableConfig {
    TableConfig {
        col_min: layout.len(),
        col_max: layout.len(),
        row_min: rows,
        row_max: rows,
        type_fix: Some(layout),
        value_repeat_ratio: vec![0.0, 0.25, 0.5],
        int_range: (1, 60),
        ..TableConfig::default()
    }
}
