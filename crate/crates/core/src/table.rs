//! Random table synthesis.
//!
//! A table is `M` rows by `N` typed columns. Headers are drawn without
//! replacement from a noun lexicon; cells are drawn per column type, with a
//! per-column duplicate ratio realised by pool resampling: a pool of
//! `ceil(M * (1 - p))` distinct values is drawn, every pool value is used once,
//! and the remaining cells are re-drawn from the pool. The duplicate fraction
//! `1 - distinct / M` then equals `p` up to rounding.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::seed::{derive_seed, rng_from_seed, GenRng, STREAM_PLACEMENT};
use crate::value::{format_date, parse_date, Value};

static DEFAULT_NOUNS: &str = include_str!("../data/nouns.txt");

/// Words that would collide with the SQL subset's keywords if used as headers.
const RESERVED: &[&str] = &[
    "select", "from", "where", "group", "by", "having", "order", "asc", "desc", "limit", "and",
    "or", "not", "in", "like", "distinct", "count", "sum", "min", "max", "avg", "join", "on", "as",
    "union", "inner", "left", "right", "outer", "cross", "null", "is", "between", "table",
    "my_table", "case", "when", "then", "else", "end", "exists", "offset", "all", "any",
    "intersect", "except", "natural", "using", "with",
];

pub fn is_reserved_word(word: &str) -> bool {
    RESERVED.contains(&word)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("lexicon has {available} usable words, {requested} requested")]
    LexiconTooSmall { available: usize, requested: usize },
    #[error("row {row} out of range for a table with {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("column `{0}` not found")]
    ColumnNotFound(String),
    #[error("value `{value}` does not fit column `{column}`")]
    TypeMismatch { column: String, value: String },
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl TableError {
    fn config(field: &str, message: impl Into<String>) -> Self {
        TableError::ConfigInvalid { field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnType {
    #[serde(rename = "TEXT")]
    Text,
    #[serde(rename = "INT")]
    Int,
    #[serde(rename = "DATE")]
    Date,
}

impl ColumnType {
    pub const ALL: [ColumnType; 3] = [ColumnType::Text, ColumnType::Int, ColumnType::Date];

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "TEXT",
            ColumnType::Int => "INT",
            ColumnType::Date => "DATE",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColumnType {
    type Err = TableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TEXT" => Ok(ColumnType::Text),
            "INT" => Ok(ColumnType::Int),
            "DATE" => Ok(ColumnType::Date),
            other => Err(TableError::config("text_int_date_fix", format!("unknown type `{other}`"))),
        }
    }
}

pub const DEFAULT_INT_RANGE: (i64, i64) = (1, 1000);
pub const DEFAULT_TEXT_LEN_RANGE: (usize, usize) = (5, 12);

pub fn default_date_range() -> (NaiveDate, NaiveDate) {
    (
        NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
        NaiveDate::from_ymd_opt(2023, 12, 31).unwrap(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub header: String,
    #[serde(rename = "type")]
    pub ctype: ColumnType,
    #[serde(default)]
    pub repeat_ratio: f64,
    #[serde(default = "default_int_range")]
    pub int_range: (i64, i64),
    #[serde(default = "default_text_len_range")]
    pub text_len_range: (usize, usize),
    #[serde(default = "default_date_range")]
    pub date_range: (NaiveDate, NaiveDate),
}

fn default_int_range() -> (i64, i64) {
    DEFAULT_INT_RANGE
}

fn default_text_len_range() -> (usize, usize) {
    DEFAULT_TEXT_LEN_RANGE
}

impl ColumnSpec {
    pub fn new(header: impl Into<String>, ctype: ColumnType) -> Self {
        ColumnSpec {
            header: header.into(),
            ctype,
            repeat_ratio: 0.0,
            int_range: DEFAULT_INT_RANGE,
            text_len_range: DEFAULT_TEXT_LEN_RANGE,
            date_range: default_date_range(),
        }
    }

    /// Whether `value` has this column's type and lies within its ranges.
    pub fn conforms(&self, value: &Value) -> bool {
        match (self.ctype, value) {
            (ColumnType::Int, Value::Int(i)) => (self.int_range.0..=self.int_range.1).contains(i),
            (ColumnType::Text, Value::Text(s)) => {
                (self.text_len_range.0..=self.text_len_range.1).contains(&s.chars().count())
                    && !s.is_empty()
            }
            (ColumnType::Date, Value::Date(d)) => (self.date_range.0..=self.date_range.1).contains(d),
            _ => false,
        }
    }

    /// Number of distinct values this column can hold, saturating.
    pub fn value_space(&self) -> u128 {
        match self.ctype {
            ColumnType::Int => (self.int_range.1 as i128 - self.int_range.0 as i128 + 1).max(0) as u128,
            ColumnType::Date => {
                ((self.date_range.1 - self.date_range.0).num_days() + 1).max(0) as u128
            }
            ColumnType::Text => {
                let mut total: u128 = 0;
                for len in self.text_len_range.0.max(1)..=self.text_len_range.1 {
                    total = total.saturating_add(26u128.saturating_pow(len.min(27) as u32));
                }
                total
            }
        }
    }

    /// Draws one value uniformly from this column's value space.
    pub fn random_value(&self, rng: &mut GenRng) -> Value {
        match self.ctype {
            ColumnType::Int => Value::Int(rng.gen_range(self.int_range.0..=self.int_range.1)),
            ColumnType::Date => {
                let span = (self.date_range.1 - self.date_range.0).num_days();
                let offset = rng.gen_range(0..=span);
                Value::Date(self.date_range.0 + chrono::Duration::days(offset))
            }
            ColumnType::Text => {
                let len = rng.gen_range(self.text_len_range.0.max(1)..=self.text_len_range.1);
                Value::Text((0..len).map(|_| (b'a' + rng.gen_range(0..26u8)) as char).collect())
            }
        }
    }
}

/// A generated (or loaded) table. Rows are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<ColumnSpec>,
    pub rows: Vec<Vec<Value>>,
    pub seed: u64,
}

impl Table {
    /// Builds a table, checking shape, header uniqueness and cell types.
    pub fn new(columns: Vec<ColumnSpec>, rows: Vec<Vec<Value>>) -> Result<Table, TableError> {
        let table = Table { columns, rows, seed: 0 };
        table.check_shape()?;
        Ok(table)
    }

    fn check_shape(&self) -> Result<(), TableError> {
        let mut seen = HashSet::new();
        for c in &self.columns {
            if c.header.is_empty() || !seen.insert(c.header.as_str()) {
                return Err(TableError::Malformed(format!("duplicate or empty header `{}`", c.header)));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(TableError::Malformed(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    self.columns.len()
                )));
            }
            for (cell, spec) in row.iter().zip(&self.columns) {
                let ok = matches!(
                    (spec.ctype, cell),
                    (ColumnType::Int, Value::Int(_))
                        | (ColumnType::Text, Value::Text(_))
                        | (ColumnType::Date, Value::Date(_))
                );
                if !ok {
                    return Err(TableError::TypeMismatch {
                        column: spec.header.clone(),
                        value: cell.render(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn headers(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.header.as_str())
    }

    pub fn column_index(&self, header: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.header == header)
    }

    pub fn column_values(&self, index: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[index])
    }

    /// Indices of columns of the given type, in table order.
    pub fn columns_of_type(&self, ctype: ColumnType) -> Vec<usize> {
        (0..self.columns.len()).filter(|&j| self.columns[j].ctype == ctype).collect()
    }

    /// Sub-table keeping the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        Table {
            columns: self.columns.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            seed: self.seed,
        }
    }

    /// Rebuilds a table from loosely typed string cells, inferring each column's
    /// type: all-integer columns become INT, all-ISO-date columns DATE, the rest TEXT.
    pub fn from_strings(headers: Vec<String>, rows: Vec<Vec<String>>) -> Result<Table, TableError> {
        let n = headers.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(TableError::Malformed(format!("row {i} has {} cells, expected {n}", r.len())));
            }
        }
        let mut columns = Vec::with_capacity(n);
        for (j, h) in headers.into_iter().enumerate() {
            let cells: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
            let ctype = if !cells.is_empty() && cells.iter().all(|c| c.parse::<i64>().is_ok()) {
                ColumnType::Int
            } else if !cells.is_empty() && cells.iter().all(|c| parse_date(c).is_some()) {
                ColumnType::Date
            } else {
                ColumnType::Text
            };
            columns.push(ColumnSpec::new(h, ctype));
        }
        let typed = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .zip(&columns)
                    .map(|(c, spec)| cell_from_str(&c, spec.ctype))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        // Widen ranges so loaded tables always conform.
        for (j, spec) in columns.iter_mut().enumerate() {
            widen_ranges(spec, typed.iter().map(|r| &r[j]));
        }
        Table::new(columns, typed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableFile::from(self)).expect("table serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Table, TableError> {
        let file: TableFile =
            serde_json::from_value(value).map_err(|e| TableError::Malformed(e.to_string()))?;
        file.try_into()
    }
}

fn widen_ranges<'a>(spec: &mut ColumnSpec, cells: impl Iterator<Item = &'a Value>) {
    for cell in cells {
        match cell {
            Value::Int(i) => {
                spec.int_range = (spec.int_range.0.min(*i), spec.int_range.1.max(*i));
            }
            Value::Text(s) => {
                let l = s.chars().count();
                spec.text_len_range = (spec.text_len_range.0.min(l), spec.text_len_range.1.max(l));
            }
            Value::Date(d) => {
                spec.date_range = (spec.date_range.0.min(*d), spec.date_range.1.max(*d));
            }
            _ => {}
        }
    }
}

pub fn cell_from_str(s: &str, ctype: ColumnType) -> Result<Value, TableError> {
    let bad = || TableError::Malformed(format!("`{s}` is not a valid {ctype} cell"));
    match ctype {
        ColumnType::Int => s.trim().parse().map(Value::Int).map_err(|_| bad()),
        ColumnType::Date => parse_date(s.trim()).map(Value::Date).ok_or_else(bad),
        ColumnType::Text => Ok(Value::Text(s.to_string())),
    }
}

/// JSON file form of a table: typed column specs plus rows of plain JSON cells.
#[derive(Serialize, Deserialize)]
struct TableFile {
    columns: Vec<ColumnSpec>,
    rows: Vec<Vec<serde_json::Value>>,
    #[serde(default)]
    seed: u64,
}

impl From<&Table> for TableFile {
    fn from(t: &Table) -> Self {
        let rows = t
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| match v {
                        Value::Int(i) => serde_json::Value::from(*i),
                        other => serde_json::Value::from(other.render()),
                    })
                    .collect()
            })
            .collect();
        TableFile { columns: t.columns.clone(), rows, seed: t.seed }
    }
}

impl TryFrom<TableFile> for Table {
    type Error = TableError;

    fn try_from(file: TableFile) -> Result<Self, Self::Error> {
        let mut rows = Vec::with_capacity(file.rows.len());
        for (i, r) in file.rows.into_iter().enumerate() {
            if r.len() != file.columns.len() {
                return Err(TableError::Malformed(format!("row {i} has wrong width")));
            }
            let typed = r
                .into_iter()
                .zip(&file.columns)
                .map(|(cell, spec)| {
                    let s = match cell {
                        serde_json::Value::String(s) => s,
                        other => other.to_string(),
                    };
                    cell_from_str(&s, spec.ctype)
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(typed);
        }
        let mut t = Table::new(file.columns, rows)?;
        t.seed = file.seed;
        Ok(t)
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TableFile::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Table {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = TableFile::deserialize(deserializer)?;
        Table::try_from(file).map_err(serde::de::Error::custom)
    }
}

/// Per-column duplicate-ratio override: a fixed fraction or `"random"`
/// (draw from the `value_repeat_ratio` candidates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RepeatFix {
    Random,
    Fixed(f64),
}

impl Serialize for RepeatFix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            RepeatFix::Random => serializer.serialize_str("random"),
            RepeatFix::Fixed(p) => serializer.serialize_f64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for RepeatFix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) if s.eq_ignore_ascii_case("random") => Ok(RepeatFix::Random),
            serde_json::Value::Number(n) => Ok(RepeatFix::Fixed(n.as_f64().unwrap_or(0.0))),
            other => Err(serde::de::Error::custom(format!(
                "value_repeat_ratio_fix entries must be numbers or \"random\", got {other}"
            ))),
        }
    }
}

/// Table-generation contract. JSON keys follow the published config layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub col_min: usize,
    pub col_max: usize,
    pub row_min: usize,
    pub row_max: usize,
    /// TEXT, INT, DATE proportions.
    #[serde(rename = "text_int_date", default = "default_type_ratio")]
    pub type_ratio: [f64; 3],
    #[serde(rename = "text_int_date_fix", default, skip_serializing_if = "Option::is_none")]
    pub type_fix: Option<Vec<ColumnType>>,
    /// Candidate duplicate ratios; each column draws one uniformly.
    #[serde(default)]
    pub value_repeat_ratio: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_repeat_ratio_fix: Option<Vec<RepeatFix>>,
    #[serde(default = "default_int_range")]
    pub int_range: (i64, i64),
    #[serde(default = "default_text_len_range")]
    pub text_len_range: (usize, usize),
    #[serde(default = "default_date_range")]
    pub date_range: (NaiveDate, NaiveDate),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
}

fn default_type_ratio() -> [f64; 3] {
    [0.55, 0.35, 0.10]
}

pub const TABLE_CONFIG_KEYS: &[&str] = &[
    "col_min",
    "col_max",
    "row_min",
    "row_max",
    "text_int_date",
    "text_int_date_fix",
    "value_repeat_ratio",
    "value_repeat_ratio_fix",
    "int_range",
    "text_len_range",
    "date_range",
    "lexicon_path",
];

impl Default for TableConfig {
    /// The general-setting table shape: 30 rows, 5 columns.
    fn default() -> Self {
        TableConfig {
            col_min: 5,
            col_max: 5,
            row_min: 30,
            row_max: 30,
            type_ratio: [0.5, 0.45, 0.05],
            type_fix: None,
            value_repeat_ratio: vec![0.0, 0.2, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            value_repeat_ratio_fix: None,
            int_range: DEFAULT_INT_RANGE,
            text_len_range: DEFAULT_TEXT_LEN_RANGE,
            date_range: default_date_range(),
            lexicon_path: None,
        }
    }
}

impl TableConfig {
    pub fn with_shape(rows: usize, cols: usize) -> Self {
        TableConfig { row_min: rows, row_max: rows, col_min: cols, col_max: cols, ..Self::default() }
    }

    pub fn with_rows(mut self, rows: usize) -> Self {
        self.row_min = rows;
        self.row_max = rows;
        self
    }

    pub fn validate(&self) -> Result<(), TableError> {
        if self.col_min == 0 || self.col_min > self.col_max {
            return Err(TableError::config("col_min", "need 1 <= col_min <= col_max"));
        }
        if self.row_min == 0 || self.row_min > self.row_max {
            return Err(TableError::config("row_min", "need 1 <= row_min <= row_max"));
        }
        if self.type_ratio.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(TableError::config("text_int_date", "entries must lie in [0, 1]"));
        }
        if (self.type_ratio.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(TableError::config("text_int_date", "entries must sum to 1"));
        }
        if let Some(fix) = &self.type_fix {
            if fix.is_empty() {
                return Err(TableError::config("text_int_date_fix", "must not be empty"));
            }
        }
        if self.value_repeat_ratio.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(TableError::config("value_repeat_ratio", "entries must lie in [0, 1]"));
        }
        if let Some(fix) = &self.value_repeat_ratio_fix {
            if fix.iter().any(|f| matches!(f, RepeatFix::Fixed(p) if !(0.0..=1.0).contains(p))) {
                return Err(TableError::config("value_repeat_ratio_fix", "entries must lie in [0, 1]"));
            }
        }
        if self.int_range.0 > self.int_range.1 {
            return Err(TableError::config("int_range", "lo must not exceed hi"));
        }
        if self.text_len_range.0 == 0 || self.text_len_range.0 > self.text_len_range.1 {
            return Err(TableError::config("text_len_range", "need 1 <= lo <= hi"));
        }
        if self.date_range.0 > self.date_range.1 {
            return Err(TableError::config("date_range", "lo must not exceed hi"));
        }
        Ok(())
    }
}

/// Normalized header vocabulary: lowercase, purely alphabetic, deduplicated,
/// with SQL keywords removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    words: Vec<String>,
}

impl Lexicon {
    pub fn from_words<I, S>(words: I) -> Lexicon
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if w.is_empty() || !w.bytes().all(|b| b.is_ascii_lowercase()) || is_reserved_word(&w) {
                continue;
            }
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        Lexicon { words: out }
    }

    /// One word per line, UTF-8.
    pub fn from_path(path: &Path) -> Result<Lexicon, TableError> {
        let text = fs::read_to_string(path)
            .map_err(|e| TableError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(Lexicon::from_words(text.lines()))
    }

    /// Bundled English noun list (WordNet 3.0 single-word nouns).
    pub fn default_nouns() -> Arc<Lexicon> {
        static NOUNS: OnceLock<Arc<Lexicon>> = OnceLock::new();
        NOUNS.get_or_init(|| Arc::new(Lexicon::from_words(DEFAULT_NOUNS.lines()))).clone()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Draws `n` distinct headers from the lexicon without replacement.
pub fn sample_headers(lexicon: &Lexicon, n: usize, rng: &mut GenRng) -> Result<Vec<String>, TableError> {
    if lexicon.len() < n {
        return Err(TableError::LexiconTooSmall { available: lexicon.len(), requested: n });
    }
    let picked = rand::seq::index::sample(rng, lexicon.len(), n);
    Ok(picked.into_iter().map(|i| lexicon.words[i].clone()).collect())
}

/// Splits `n` columns across TEXT/INT/DATE by largest remainder.
fn apportion_types(n: usize, ratio: [f64; 3]) -> Vec<ColumnType> {
    let quotas: Vec<f64> = ratio.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < n {
        counts[order[k % 3]] += 1;
        assigned += 1;
        k += 1;
    }
    ColumnType::ALL
        .iter()
        .zip(counts)
        .flat_map(|(t, c)| std::iter::repeat_n(*t, c))
        .collect()
}

/// Table generator holding the resolved lexicon.
#[derive(Debug, Clone)]
pub struct TableGenerator {
    config: TableConfig,
    lexicon: Arc<Lexicon>,
}

impl TableGenerator {
    pub fn new(config: TableConfig) -> Result<Self, TableError> {
        config.validate()?;
        let lexicon = match &config.lexicon_path {
            Some(p) => Arc::new(Lexicon::from_path(p)?),
            None => Lexicon::default_nouns(),
        };
        Ok(TableGenerator { config, lexicon })
    }

    pub fn with_lexicon(config: TableConfig, lexicon: Arc<Lexicon>) -> Result<Self, TableError> {
        config.validate()?;
        Ok(TableGenerator { config, lexicon })
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn generate(&self, seed: u64) -> Result<Table, TableError> {
        let cfg = &self.config;
        let mut rng = rng_from_seed(seed);
        let n_cols = match &cfg.type_fix {
            Some(fix) => fix.len(),
            None => rng.gen_range(cfg.col_min..=cfg.col_max),
        };
        let n_rows = rng.gen_range(cfg.row_min..=cfg.row_max);
        let types = match &cfg.type_fix {
            Some(fix) => fix.clone(),
            None => {
                let mut t = apportion_types(n_cols, cfg.type_ratio);
                t.shuffle(&mut rng);
                t
            }
        };
        let headers = sample_headers(&self.lexicon, n_cols, &mut rng)?;

        let mut columns = Vec::with_capacity(n_cols);
        for (j, (header, ctype)) in headers.into_iter().zip(types).enumerate() {
            let fixed = cfg.value_repeat_ratio_fix.as_ref().and_then(|f| f.get(j)).copied();
            let repeat_ratio = match fixed {
                Some(RepeatFix::Fixed(p)) => p,
                _ => cfg.value_repeat_ratio.choose(&mut rng).copied().unwrap_or(0.0),
            };
            columns.push(ColumnSpec {
                header,
                ctype,
                repeat_ratio,
                int_range: cfg.int_range,
                text_len_range: cfg.text_len_range,
                date_range: cfg.date_range,
            });
        }

        let mut cols: Vec<Vec<Value>> = Vec::with_capacity(n_cols);
        for spec in &columns {
            cols.push(column_cells(spec, n_rows, &mut rng)?);
        }
        let rows = (0..n_rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
        Ok(Table { columns, rows, seed })
    }
}

/// Pool size giving an expected duplicate fraction of `p` over `rows` cells.
pub fn pool_size(rows: usize, p: f64) -> usize {
    let k = (rows as f64 * (1.0 - p)).ceil() as usize;
    k.clamp(1, rows.max(1))
}

fn column_cells(spec: &ColumnSpec, rows: usize, rng: &mut GenRng) -> Result<Vec<Value>, TableError> {
    if rows == 0 {
        return Ok(Vec::new());
    }
    let k = pool_size(rows, spec.repeat_ratio);
    if (k as u128) > spec.value_space() {
        return Err(TableError::config(
            "value_repeat_ratio",
            format!(
                "column `{}` needs {k} distinct {} values but its range only holds {}",
                spec.header,
                spec.ctype,
                spec.value_space()
            ),
        ));
    }
    let pool = distinct_values(spec, k, rng);
    let mut cells = pool.clone();
    for _ in k..rows {
        cells.push(pool[rng.gen_range(0..k)].clone());
    }
    cells.shuffle(rng);
    Ok(cells)
}

fn distinct_values(spec: &ColumnSpec, k: usize, rng: &mut GenRng) -> Vec<Value> {
    match spec.ctype {
        ColumnType::Int => {
            let span = spec.value_space() as usize;
            rand::seq::index::sample(rng, span, k)
                .into_iter()
                .map(|i| Value::Int(spec.int_range.0 + i as i64))
                .collect()
        }
        ColumnType::Date => {
            let span = spec.value_space() as usize;
            rand::seq::index::sample(rng, span, k)
                .into_iter()
                .map(|i| Value::Date(spec.date_range.0 + chrono::Duration::days(i as i64)))
                .collect()
        }
        ColumnType::Text => {
            let mut seen = HashSet::with_capacity(k);
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let v = spec.random_value(rng);
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
            out
        }
    }
}

/// Generates the table for `(config, seed)`; byte-identical on repeat calls.
pub fn generate_table(config: &TableConfig, seed: u64) -> Result<Table, TableError> {
    TableGenerator::new(config.clone())?.generate(seed)
}

/// Puts `key_value` in `key_column` at exactly `target_rows`.
///
/// Every other cell of the key column that held `key_value` is re-drawn from
/// the column's remaining values (or freshly if none remain). All other
/// columns are untouched.
pub fn place_answer_rows(
    table: &Table,
    key_column: &str,
    key_value: &Value,
    target_rows: &[usize],
) -> Result<Table, TableError> {
    let col = table
        .column_index(key_column)
        .ok_or_else(|| TableError::ColumnNotFound(key_column.to_string()))?;
    let rows = table.num_rows();
    let mut targets = HashSet::new();
    for &r in target_rows {
        if r >= rows || !targets.insert(r) {
            return Err(TableError::RowOutOfRange { row: r, rows });
        }
    }
    let spec = &table.columns[col];
    let type_ok = matches!(
        (spec.ctype, key_value),
        (ColumnType::Int, Value::Int(_)) | (ColumnType::Text, Value::Text(_)) | (ColumnType::Date, Value::Date(_))
    );
    if !type_ok {
        return Err(TableError::TypeMismatch { column: key_column.to_string(), value: key_value.render() });
    }

    let mut rng = rng_from_seed(derive_seed(table.seed, STREAM_PLACEMENT, col as u64));
    let replacements: Vec<Value> = {
        let mut seen = HashSet::new();
        table
            .column_values(col)
            .enumerate()
            .filter(|(i, v)| !targets.contains(i) && *v != key_value)
            .filter_map(|(_, v)| seen.insert(v.clone()).then(|| v.clone()))
            .collect()
    };

    let mut out = table.clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        if targets.contains(&i) {
            row[col] = key_value.clone();
        } else if &row[col] == key_value {
            row[col] = if replacements.is_empty() {
                loop {
                    let v = spec.random_value(&mut rng);
                    if &v != key_value {
                        break v;
                    }
                }
            } else {
                replacements[rng.gen_range(0..replacements.len())].clone()
            };
        }
    }
    Ok(out)
}

/// Renders a cell the way table files expect it.
pub fn cell_string(v: &Value) -> String {
    match v {
        Value::Date(d) => format_date(*d),
        other => other.render(),
    }
}
