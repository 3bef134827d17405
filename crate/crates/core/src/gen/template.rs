//! Template library and slot binding.
//!
//! A skeleton is SQL text with slots:
//!
//! - `<text_colK>`, `<int_colK>`: headers of the K-th distinct text/int column.
//! - `<text_K>`, `<int_K>` (also `<textK>`, `<intK>`): a value of that column.
//! - `<opK>`: one of `>`, `<`, `=`.
//! - `<gcount>`, `<gsumK>`: the row count of, or the sum of `<int_colK>` over,
//!   the group containing the witness row.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grammar::{self, Part};
use super::GenError;
use crate::seed::GenRng;
use crate::sql::{parse, quote, Query};
use crate::table::{ColumnType, Table};
use crate::value::Value;

/// Probability that a value slot is bound to a freshly drawn (usually absent) value.
pub const ABSENT_VALUE_PROB: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetName {
    Easy,
    General,
    Filter,
    Aggregate,
    Arithmetic,
    Superlative,
    Comparative,
    Group,
    Count,
    WhereCondition,
    Template1,
    Template2,
    Template3,
}

impl SetName {
    pub const ALL: [SetName; 13] = [
        SetName::Easy,
        SetName::General,
        SetName::Filter,
        SetName::Aggregate,
        SetName::Arithmetic,
        SetName::Superlative,
        SetName::Comparative,
        SetName::Group,
        SetName::Count,
        SetName::WhereCondition,
        SetName::Template1,
        SetName::Template2,
        SetName::Template3,
    ];

    /// The six reasoning-type sets.
    pub const REASONING: [SetName; 6] = [
        SetName::Filter,
        SetName::Aggregate,
        SetName::Arithmetic,
        SetName::Superlative,
        SetName::Comparative,
        SetName::Group,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SetName::Easy => "Easy",
            SetName::General => "General",
            SetName::Filter => "Filter",
            SetName::Aggregate => "Aggregate",
            SetName::Arithmetic => "Arithmetic",
            SetName::Superlative => "Superlative",
            SetName::Comparative => "Comparative",
            SetName::Group => "Group",
            SetName::Count => "Count",
            SetName::WhereCondition => "WhereCondition",
            SetName::Template1 => "Template1",
            SetName::Template2 => "Template2",
            SetName::Template3 => "Template3",
        }
    }
}

impl fmt::Display for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetName {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        SetName::ALL
            .into_iter()
            .find(|n| n.as_str().to_ascii_lowercase() == key)
            .ok_or_else(|| GenError::ConfigInvalid {
                field: "template_set".into(),
                message: format!("unknown template set `{s}`"),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateKind {
    Skeleton(String),
    Production(Vec<Part>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    /// Stable name, `<set>-<n>` with 1-based n.
    pub name: String,
    pub set: SetName,
    pub kind: TemplateKind,
    /// Column slots fixed to a table column index, e.g. `("text_col1", 3)`.
    pub pins: Vec<(String, usize)>,
}

impl Template {
    pub fn skeleton(set: SetName, n: usize, text: &str) -> Template {
        Template {
            name: format!("{}-{n}", set.as_str().to_ascii_lowercase()),
            set,
            kind: TemplateKind::Skeleton(text.to_string()),
            pins: Vec::new(),
        }
    }

    pub fn pin(mut self, slot: &str, column: usize) -> Template {
        self.pins.push((slot.to_string(), column));
        self
    }

    /// The skeleton or production text as written in the library.
    pub fn text(&self) -> String {
        match &self.kind {
            TemplateKind::Skeleton(s) => s.clone(),
            TemplateKind::Production(parts) => grammar::production_text(parts),
        }
    }

    /// Whether `name` refers to this template, by name or by skeleton text.
    pub fn matches(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name.trim()) || self.text() == name.trim()
    }

    /// Column slots the template needs, per type.
    pub fn column_demand(&self) -> (usize, usize) {
        match &self.kind {
            TemplateKind::Skeleton(s) => {
                let (mut t, mut i) = (0, 0);
                for tok in s.split_whitespace() {
                    if let Some(Slot::Column(ty, k)) = Slot::parse(tok) {
                        match ty {
                            ColumnType::Text => t = t.max(k),
                            _ => i = i.max(k),
                        }
                    }
                }
                (t, i)
            }
            TemplateKind::Production(_) => (0, 0),
        }
    }

    pub fn satisfiable_on(&self, table: &Table) -> bool {
        match &self.kind {
            TemplateKind::Skeleton(_) => {
                let (t, i) = self.column_demand();
                table.columns_of_type(ColumnType::Text).len() >= t && table.columns_of_type(ColumnType::Int).len() >= i
            }
            TemplateKind::Production(parts) => grammar::satisfiable(parts, table),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub name: SetName,
    pub templates: Vec<Template>,
}

const EASY: &[&str] = &[
    "select <text_col1> from my_table where <int_col1> = <int_1>",
    "select <int_col1> from my_table where <text_col1> = <text_1>",
    "select <int_col1> from my_table where <int_col2> = <int_2>",
    "select <text_col1> from my_table where <text_col2> = <text_2>",
];

const WHERE_CONDITION: &[&str] = &["select <text_col1> from my_table where <text_col2> = <text_2>"];

const COUNT: &[&str] = &["select count ( <text_col1> ) from my_table where <text_col1> = <text_1>"];

const FILTER: &[&str] = &[
    "select <text_col1> from my_table where <text_col2> = <text_2>",
    "select <text_col1> from my_table where <int_col2> <op2> <int_2>",
    "select <text_col1> from my_table where <text_col2> = <text_2> and <int_col1> <op1> <int_1>",
    "select <text_col1> from my_table where <text_col2> = <text_2> and <text_col3> = <text_3>",
    "select <text_col1> from my_table where <int_col1> <op1> <int_1> and <int_col2> <op2> <int_2>",
    "select <int_col1> from my_table where <text_col1> = <text_1>",
    "select <int_col1> from my_table where <int_col2> <op2> <int_2>",
    "select <int_col1> from my_table where <text_col2> = <text_2> and <int_col2> <op2> <int_2>",
    "select <int_col1> from my_table where <text_col2> = <text_2> and <text_col3> = <text_3>",
    "select <int_col1> from my_table where <int_col2> <op2> <int_2> and <int_col3> <op3> <int_3>",
];

const AGGREGATE: &[&str] = &[
    "select count ( <text_col1> ) from my_table where <text_col2> = <text_2>",
    "select count ( <text_col1> ) from my_table where <int_col2> <op2> <int_2>",
    "select sum ( <int_col1> ) from my_table",
    "select sum ( <int_col1> ) from my_table where <text_col2> = <text_2>",
    "select max ( <int_col1> ) from my_table",
    "select max ( <int_col1> ) from my_table where <text_col2> = <text_2>",
    "select min ( <int_col1> ) from my_table",
    "select min ( <int_col1> ) from my_table where <text_col2> = <text_2>",
];

const ARITHMETIC: &[&str] = &[
    "select <int_col1> + <int_col2> from my_table where <text_col1> = <text_1>",
    "select <int_col1> + <int_col2> from my_table where <text_col1> = <text_1> and <text_col2> = <text_2>",
    "select <int_col1> - <int_col2> from my_table where <text_col1> = <text_1>",
    "select <int_col1> - <int_col2> from my_table where <text_col1> = <text_1> and <text_col2> = <text_2>",
];

const SUPERLATIVE: &[&str] = &[
    "select <int_col1> from my_table order by <int_col1> asc limit 1",
    "select <int_col1> from my_table order by <int_col1> desc limit 1",
    "select <text_col1> from my_table order by <int_col1> asc limit 1",
    "select <text_col1> from my_table order by <int_col1> desc limit 1",
    "select <int_col1> from my_table order by <int_col2> asc limit 1",
    "select <int_col1> from my_table order by <int_col2> desc limit 1",
];

const COMPARATIVE: &[&str] = &[
    "select ( select <int_col1> from my_table where <text_col1> = <text_1> ) > ( select <int_col1> from my_table where <text_col2> = <text_2> )",
    "select ( select <int_col1> from my_table where <int_col2> <op2> <int_2> ) > ( select <int_col1> from my_table where <int_col3> <op3> <int_3> )",
    "select ( select <int_col1> from my_table where <text_col1> = <text_1> ) < ( select <int_col1> from my_table where <text_col2> = <text_2> )",
    "select ( select <int_col1> from my_table where <int_col2> <op2> <int_2> ) < ( select <int_col1> from my_table where <int_col3> <op3> <int_3> )",
    "select <int_col1> > <int_col2> from my_table where <text_col1> = <text_1>",
    "select <int_col1> < <int_col2> from my_table where <text_col1> = <text_1>",
    "select <int_col1> > <int_col2> from my_table where <int_col3> <op3> <int_3>",
    "select <int_col1> < <int_col2> from my_table where <int_col3> <op3> <int_3>",
];

const GROUP: &[&str] = &[
    "select count ( <text_col1> ) from my_table group by <text_col1> having sum ( <int_col1> ) = <gsum1>",
    "select <text_col1> from my_table group by <text_col1> having sum ( <int_col1> ) = <gsum1>",
    "select <text_col1> from my_table group by <text_col1> having max ( <int_col1> ) = <int_1>",
    "select <text_col1> from my_table group by <text_col1> having min ( <int_col1> ) = <int_1>",
    "select <text_col1> from my_table group by <text_col2> having sum ( <int_col1> ) = <gsum1>",
    "select count ( <text_col1> ) from my_table group by <text_col2> having max ( <int_col1> ) = <int_1>",
    "select sum ( <int_col1> ) from my_table group by <text_col1> having max ( <int_col1> ) = <int_1>",
];

/// Conjunct count used by `TemplateSet::named(Template2)`.
pub const TEMPLATE2_DEFAULT_N: usize = 3;

impl TemplateSet {
    fn from_list(name: SetName, list: &[&str]) -> TemplateSet {
        let templates = list.iter().enumerate().map(|(i, s)| Template::skeleton(name, i + 1, s)).collect();
        TemplateSet { name, templates }
    }

    pub fn named(name: SetName) -> TemplateSet {
        match name {
            SetName::Easy => Self::from_list(name, EASY),
            SetName::General => TemplateSet {
                name,
                templates: grammar::PRODUCTIONS
                    .iter()
                    .enumerate()
                    .map(|(i, parts)| Template {
                        name: format!("general-{}", i + 1),
                        set: name,
                        kind: TemplateKind::Production(parts.to_vec()),
                        pins: Vec::new(),
                    })
                    .collect(),
            },
            SetName::Filter => Self::from_list(name, FILTER),
            SetName::Aggregate => Self::from_list(name, AGGREGATE),
            SetName::Arithmetic => Self::from_list(name, ARITHMETIC),
            SetName::Superlative => Self::from_list(name, SUPERLATIVE),
            SetName::Comparative => Self::from_list(name, COMPARATIVE),
            SetName::Group => Self::from_list(name, GROUP),
            SetName::Count => Self::from_list(name, COUNT),
            SetName::WhereCondition => Self::from_list(name, WHERE_CONDITION),
            SetName::Template1 => Self::from_list(name, WHERE_CONDITION),
            SetName::Template2 => Self::template2(TEMPLATE2_DEFAULT_N),
            SetName::Template3 => Self::from_list(name, COUNT),
        }
    }

    /// The where-condition skeleton with its two columns pinned to table positions.
    pub fn template1(select_column: usize, filter_column: usize) -> TemplateSet {
        let t = Template::skeleton(SetName::Template1, 1, WHERE_CONDITION[0])
            .pin("text_col1", select_column)
            .pin("text_col2", filter_column);
        TemplateSet { name: SetName::Template1, templates: vec![t] }
    }

    /// The where-condition skeleton with `n` equality conjuncts over distinct text columns.
    pub fn template2(n: usize) -> TemplateSet {
        let conds: Vec<String> = (0..n.max(1)).map(|i| format!("<text_col{k}> = <text_{k}>", k = i + 2)).collect();
        let text = format!("select <text_col1> from my_table where {}", conds.join(" and "));
        TemplateSet { name: SetName::Template2, templates: vec![Template::skeleton(SetName::Template2, 1, &text)] }
    }

    /// Templates left after applying include/exclude name lists.
    pub fn filtered(&self, include: &[String], exclude: &[String]) -> Vec<&Template> {
        self.templates
            .iter()
            .filter(|t| include.is_empty() || include.iter().any(|n| t.matches(n)))
            .filter(|t| !exclude.iter().any(|n| t.matches(n)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Column(ColumnType, usize),
    Value(ColumnType, usize),
    Op,
    GroupCount,
    GroupSum(usize),
}

impl Slot {
    fn parse(tok: &str) -> Option<Slot> {
        let inner = tok.strip_prefix('<')?.strip_suffix('>')?;
        let num = |s: &str| s.trim_start_matches('_').parse::<usize>().ok();
        if inner == "gcount" {
            return Some(Slot::GroupCount);
        }
        if let Some(k) = inner.strip_prefix("gsum") {
            return num(k).map(Slot::GroupSum);
        }
        if let Some(k) = inner.strip_prefix("text_col") {
            return num(k).map(|k| Slot::Column(ColumnType::Text, k));
        }
        if let Some(k) = inner.strip_prefix("int_col") {
            return num(k).map(|k| Slot::Column(ColumnType::Int, k));
        }
        if let Some(k) = inner.strip_prefix("text") {
            return num(k).map(|k| Slot::Value(ColumnType::Text, k));
        }
        if let Some(k) = inner.strip_prefix("int") {
            return num(k).map(|k| Slot::Value(ColumnType::Int, k));
        }
        if inner.starts_with("op") {
            return Some(Slot::Op);
        }
        None
    }
}

/// SQL literal text for a cell value.
pub fn value_literal(v: &Value) -> String {
    match v {
        Value::Text(_) | Value::Date(_) => quote(&v.render()),
        other => other.render(),
    }
}

fn bind_columns(template: &Template, table: &Table, rng: &mut GenRng) -> Result<BTreeMap<(ColumnType, usize), usize>, GenError> {
    let (need_t, need_i) = template.column_demand();
    let mut out = BTreeMap::new();
    for (ty, need) in [(ColumnType::Text, need_t), (ColumnType::Int, need_i)] {
        if need == 0 {
            continue;
        }
        let mut avail = table.columns_of_type(ty);
        let mut pinned = Vec::new();
        for (slot, col) in &template.pins {
            if let Some(Slot::Column(t, k)) = Slot::parse(&format!("<{slot}>")) {
                if t == ty {
                    if table.columns.get(*col).map(|c| c.ctype) != Some(ty) {
                        return Err(GenError::SlotUnsatisfiable(format!(
                            "{}: pinned slot <{slot}> needs a {ty} column at position {col}",
                            template.name
                        )));
                    }
                    pinned.push((k, *col));
                }
            }
        }
        avail.retain(|c| !pinned.iter().any(|(_, p)| p == c));
        let free = need - pinned.len().min(need);
        if avail.len() < free {
            return Err(GenError::SlotUnsatisfiable(format!(
                "{}: needs {need} {ty} columns, table has {}",
                template.name,
                table.columns_of_type(ty).len()
            )));
        }
        avail.shuffle(rng);
        let mut it = avail.into_iter();
        for k in 1..=need {
            let col = match pinned.iter().find(|(pk, _)| *pk == k) {
                Some((_, c)) => *c,
                None => it.next().expect("checked above"),
            };
            out.insert((ty, k), col);
        }
    }
    Ok(out)
}

/// Binds a template to `table`, returning SQL text.
pub fn instantiate_text(template: &Template, table: &Table, rng: &mut GenRng) -> Result<String, GenError> {
    let skeleton = match &template.kind {
        TemplateKind::Skeleton(s) => s,
        TemplateKind::Production(parts) => return grammar::expand(parts, table, rng),
    };
    if table.num_rows() == 0 {
        return Err(GenError::SlotUnsatisfiable("table has no rows".into()));
    }
    let cols = bind_columns(template, table, rng)?;
    let col_of = |ty: ColumnType, k: usize| -> Result<usize, GenError> {
        cols.get(&(ty, k)).copied().ok_or_else(|| {
            GenError::SlotUnsatisfiable(format!("{}: value slot {k} has no matching column slot", template.name))
        })
    };
    let m = table.num_rows();
    let mut witness = rng.gen_range(0..m);
    let mut group_col = None;
    let mut out: Vec<String> = Vec::new();
    let tokens: Vec<&str> = skeleton.split_whitespace().collect();
    for (i, tok) in tokens.iter().enumerate() {
        if *tok == "select" && i > 0 {
            witness = rng.gen_range(0..m);
        }
        let Some(slot) = Slot::parse(tok) else {
            out.push(tok.to_string());
            continue;
        };
        let text = match slot {
            Slot::Column(ty, k) => {
                let c = col_of(ty, k)?;
                if i >= 2 && tokens[i - 1] == "by" && tokens[i - 2] == "group" {
                    group_col = Some(c);
                }
                table.columns[c].header.clone()
            }
            Slot::Value(ty, k) => {
                let c = col_of(ty, k)?;
                let v = if rng.gen_bool(ABSENT_VALUE_PROB) {
                    table.columns[c].random_value(rng)
                } else if out.last().map(String::as_str) == Some("=") {
                    table.rows[witness][c].clone()
                } else {
                    table.rows[rng.gen_range(0..m)][c].clone()
                };
                value_literal(&v)
            }
            Slot::Op => [">", "<", "="].choose(rng).expect("nonempty").to_string(),
            Slot::GroupCount | Slot::GroupSum(_) => {
                let g = group_col.ok_or_else(|| {
                    GenError::SlotUnsatisfiable(format!("{}: group slot before `group by`", template.name))
                })?;
                let key = &table.rows[witness][g];
                let members = table.rows.iter().filter(|r| &r[g] == key);
                match slot {
                    Slot::GroupCount => members.count().to_string(),
                    Slot::GroupSum(k) => {
                        let c = col_of(ColumnType::Int, k)?;
                        let mut sum: i64 = 0;
                        for r in members {
                            if let Value::Int(x) = r[c] {
                                sum = sum.checked_add(x).ok_or(GenError::SlotUnsatisfiable("group sum overflows".into()))?;
                            }
                        }
                        sum.to_string()
                    }
                    _ => unreachable!(),
                }
            }
        };
        out.push(text);
    }
    Ok(out.join(" "))
}

/// Binds a template to `table` and parses the result.
pub fn instantiate(template: &Template, table: &Table, rng: &mut GenRng) -> Result<Query, GenError> {
    let sql = instantiate_text(template, table, rng)?;
    parse(&sql).map_err(|e| GenError::Template(format!("{}: `{sql}` does not parse: {e}", template.name)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::table::ColumnSpec;

    fn text_table() -> Table {
        Table::new(
            vec![ColumnSpec::new("a", ColumnType::Text), ColumnSpec::new("b", ColumnType::Text)],
            vec![vec![Value::Text("x".into()), Value::Text("y".into())]],
        )
        .unwrap()
    }

    #[test]
    fn set_sizes() {
        assert_eq!(TemplateSet::named(SetName::Easy).templates.len(), 4);
        assert_eq!(TemplateSet::named(SetName::General).templates.len(), 8);
        assert_eq!(TemplateSet::named(SetName::Filter).templates.len(), 10);
        assert_eq!(TemplateSet::named(SetName::Comparative).templates.len(), 8);
    }

    #[test]
    fn type_starvation() {
        let t = &TemplateSet::named(SetName::Arithmetic).templates[0];
        let r = instantiate(t, &text_table(), &mut rng_from_seed(1));
        assert!(matches!(r, Err(GenError::SlotUnsatisfiable(_))));
    }

    #[test]
    fn template2_expands() {
        let s = TemplateSet::template2(3);
        assert_eq!(
            s.templates[0].text(),
            "select <text_col1> from my_table where <text_col2> = <text_2> and <text_col3> = <text_3> and <text_col4> = <text_4>"
        );
    }

    #[test]
    fn set_names_parse() {
        assert_eq!("where_condition".parse::<SetName>().unwrap(), SetName::WhereCondition);
        assert_eq!("easy".parse::<SetName>().unwrap(), SetName::Easy);
        assert!("nope".parse::<SetName>().is_err());
    }
}
