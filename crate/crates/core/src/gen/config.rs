use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GenError;
use crate::sql::Keyword;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordsSetting {
    #[serde(default = "yes")]
    pub select: bool,
    #[serde(rename = "where", default = "yes")]
    pub where_: bool,
    #[serde(rename = "group by", default = "yes")]
    pub group_by: bool,
    #[serde(default = "yes")]
    pub having: bool,
    #[serde(rename = "order by", default = "yes")]
    pub order_by: bool,
}

fn yes() -> bool {
    true
}

impl Default for KeywordsSetting {
    fn default() -> Self {
        KeywordsSetting { select: true, where_: true, group_by: true, having: true, order_by: true }
    }
}

impl KeywordsSetting {
    pub fn enabled(&self, k: Keyword) -> bool {
        match k {
            Keyword::Select => self.select,
            Keyword::Where => self.where_,
            Keyword::GroupBy => self.group_by,
            Keyword::Having => self.having,
            Keyword::OrderBy => self.order_by,
        }
    }

    /// Everything enabled except `disabled`.
    pub fn without(disabled: &[Keyword]) -> Self {
        let mut s = KeywordsSetting::default();
        for k in disabled {
            match k {
                Keyword::Select => s.select = false,
                Keyword::Where => s.where_ = false,
                Keyword::GroupBy => s.group_by = false,
                Keyword::Having => s.having = false,
                Keyword::OrderBy => s.order_by = false,
            }
        }
        s
    }
}

/// `{is_available, value, min, max}`: a nonempty `value` list wins over the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "V: Deserialize<'de>, B: Deserialize<'de> + Default"))]
pub struct RangeSetting<V, B> {
    #[serde(default)]
    pub is_available: bool,
    #[serde(default = "Vec::new", deserialize_with = "null_as_empty")]
    pub value: Vec<V>,
    #[serde(default)]
    pub min: B,
    #[serde(default)]
    pub max: B,
}

impl<V: PartialEq, B: PartialOrd + Copy> RangeSetting<V, B> {
    pub fn new(min: B, max: B) -> Self {
        RangeSetting { is_available: false, value: Vec::new(), min, max }
    }

    pub fn active(min: B, max: B) -> Self {
        RangeSetting { is_available: true, value: Vec::new(), min, max }
    }

    pub fn values(value: Vec<V>, min: B, max: B) -> Self {
        RangeSetting { is_available: true, value, min, max }
    }

    /// Holds when inactive, when `count` is listed, or when `measure` lies in `[min, max]`.
    pub fn admits(&self, count: V, measure: B) -> bool {
        if !self.is_available {
            return true;
        }
        if !self.value.is_empty() {
            return self.value.contains(&count);
        }
        self.min <= measure && measure <= self.max
    }
}

/// `{is_available, value}` with a required membership list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListSetting {
    #[serde(default)]
    pub is_available: bool,
    #[serde(default = "Vec::new", deserialize_with = "null_as_empty")]
    pub value: Vec<usize>,
}

impl ListSetting {
    pub fn active(value: Vec<usize>) -> Self {
        ListSetting { is_available: true, value }
    }

    pub fn admits(&self, n: usize) -> bool {
        !self.is_available || self.value.contains(&n)
    }
}

impl Default for ListSetting {
    fn default() -> Self {
        ListSetting { is_available: false, value: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerLocation {
    #[serde(default)]
    pub is_available: bool,
    /// Allowed answer row indices; overrides the ratio bounds when nonempty.
    #[serde(default, alias = "value", deserialize_with = "null_as_empty")]
    pub row_value: Vec<usize>,
    /// Allowed answer column indices, checked only when nonempty.
    #[serde(default, deserialize_with = "null_as_empty")]
    pub column_value: Vec<usize>,
    #[serde(default)]
    pub min: f64,
    #[serde(default = "one")]
    pub max: f64,
}

impl Default for AnswerLocation {
    fn default() -> Self {
        AnswerLocation { is_available: false, row_value: Vec::new(), column_value: Vec::new(), min: 0.0, max: 1.0 }
    }
}

impl AnswerLocation {
    pub fn ratio(min: f64, max: f64) -> Self {
        AnswerLocation { is_available: true, min, max, ..Default::default() }
    }
}

fn one() -> f64 {
    1.0
}

fn null_as_empty<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<Vec<T>>::deserialize(d)?.unwrap_or_default())
}

/// Query-generation contract. JSON keys follow the published config layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqlConfig {
    #[serde(default = "default_nest")]
    pub nest: Vec<usize>,
    #[serde(default)]
    pub keywords_setting: KeywordsSetting,
    #[serde(default = "default_length")]
    pub length_setting: RangeSetting<usize, usize>,
    #[serde(default = "default_column_ratio")]
    pub column_ratio: RangeSetting<usize, f64>,
    #[serde(default = "default_row_ratio")]
    pub select_row_ratio: RangeSetting<usize, f64>,
    #[serde(default)]
    pub calculate_times: ListSetting,
    #[serde(default)]
    pub filter_times: ListSetting,
    #[serde(default)]
    pub answer_location: AnswerLocation,
    /// Required answer cell count; `null` disables the check.
    #[serde(default = "default_cells")]
    pub answer_cells_number: Option<usize>,
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default = "default_shots")]
    pub n_shot: usize,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, serde_json::Value>,
}

fn default_nest() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_length() -> RangeSetting<usize, usize> {
    RangeSetting::new(6, 16)
}
fn default_column_ratio() -> RangeSetting<usize, f64> {
    RangeSetting::new(0.1, 0.3)
}
fn default_row_ratio() -> RangeSetting<usize, f64> {
    RangeSetting::new(0.0, 0.2)
}
fn default_cells() -> Option<usize> {
    Some(1)
}
fn default_shots() -> usize {
    5
}

/// Keys accepted without a warning even though they carry no constraint.
pub const IGNORED_KEYS: &[&str] = &["multi_test", "select_grammar"];

impl Default for SqlConfig {
    fn default() -> Self {
        SqlConfig {
            nest: default_nest(),
            keywords_setting: KeywordsSetting::default(),
            length_setting: default_length(),
            column_ratio: default_column_ratio(),
            select_row_ratio: default_row_ratio(),
            calculate_times: ListSetting::default(),
            filter_times: ListSetting::default(),
            answer_location: AnswerLocation::default(),
            answer_cells_number: default_cells(),
            include: Vec::new(),
            exclude: Vec::new(),
            n_shot: default_shots(),
            unknown: BTreeMap::new(),
        }
    }
}

impl SqlConfig {
    pub fn from_json_str(s: &str) -> Result<Self, GenError> {
        let cfg: SqlConfig = serde_json::from_str(s).map_err(|e| GenError::ConfigInvalid {
            field: "sql_config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Keys present in the source JSON that this version does not interpret.
    pub fn warnings(&self) -> Vec<String> {
        self.unknown
            .keys()
            .map(|k| {
                if IGNORED_KEYS.contains(&k.as_str()) {
                    format!("config key `{k}` is accepted but has no effect")
                } else {
                    format!("unknown config key `{k}` ignored")
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |field: &str, message: &str| Err(GenError::ConfigInvalid { field: field.into(), message: message.into() });
        if self.nest.is_empty() || self.nest.iter().any(|n| !(1..=3).contains(n)) {
            return bad("nest", "must be a nonempty subset of [1, 2, 3]");
        }
        if self.length_setting.min > self.length_setting.max {
            return bad("length_setting", "min must not exceed max");
        }
        for (field, r) in [("column_ratio", &self.column_ratio), ("select_row_ratio", &self.select_row_ratio)] {
            if r.min > r.max {
                return bad(field, "min must not exceed max");
            }
            if r.min < 0.0 || r.max > 1.0 {
                return bad(field, "bounds must lie in [0, 1]");
            }
        }
        let loc = &self.answer_location;
        if loc.min > loc.max {
            return bad("answer_location", "min must not exceed max");
        }
        if loc.min < 0.0 || loc.max > 1.0 {
            return bad("answer_location", "bounds must lie in [0, 1]");
        }
        if self.answer_cells_number == Some(0) {
            return bad("answer_cells_number", "must be a positive integer");
        }
        Ok(())
    }
}
