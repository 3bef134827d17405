use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use tabexec_core::gen::Split;
use tabexec_core::table::TABLE_CONFIG_KEYS;
use tabexec_core::{SerializerStyle, SetName, SqlConfig, TableConfig, TaskStyle, TokenCounter};

use crate::error::CliError;

/// Everything `gen` needs besides count, seed and output path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub table_config: TableConfig,
    pub sql_config: SqlConfig,
    pub template_set: SetName,
    pub style: SerializerStyle,
    pub task: TaskStyle,
    /// Few-shot examples per prompt; defaults to the SQL config's `n_shot`.
    pub shots: usize,
    /// Target prompt length in tokens; fixes the row count when set.
    pub budget: Option<usize>,
    pub token_counter: TokenCounter,
    pub split: Option<Split>,
    pub holdout_fraction: f64,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

pub const GEN_CONFIG_KEYS: &[&str] = &[
    "table_config",
    "sql_config",
    "template_set",
    "style",
    "task",
    "shots",
    "budget",
    "token_counter",
    "split",
    "holdout_fraction",
];

fn invalid(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::ConfigInvalid { key: key.into(), message: message.to_string() }
}

fn field<T: serde::de::DeserializeOwned>(obj: &serde_json::Map<String, Json>, key: &str) -> Result<Option<T>, CliError> {
    match obj.get(key) {
        None | Some(Json::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| invalid(key, e)),
    }
}

/// Parses the table section, reporting the offending key on failure.
pub fn table_config_from_json(v: &Json) -> Result<(TableConfig, Vec<String>), CliError> {
    let Some(obj) = v.as_object() else {
        return Err(invalid("table_config", "must be a JSON object"));
    };
    let mut warnings = Vec::new();
    for k in obj.keys() {
        if !TABLE_CONFIG_KEYS.contains(&k.as_str()) {
            warnings.push(format!("unknown table config key `{k}` ignored"));
        }
    }
    let mut merged = serde_json::to_value(TableConfig::default()).expect("serializable");
    for key in TABLE_CONFIG_KEYS {
        let Some(v) = obj.get(*key) else { continue };
        let mut probe = merged.clone();
        probe.as_object_mut().expect("object").insert(key.to_string(), v.clone());
        serde_json::from_value::<TableConfig>(probe.clone()).map_err(|e| invalid(key, e))?;
        merged = probe;
    }
    let cfg: TableConfig = serde_json::from_value(merged).map_err(|e| invalid("table_config", e))?;
    cfg.validate()?;
    Ok((cfg, warnings))
}

pub fn sql_config_from_json(v: &Json) -> Result<(SqlConfig, Vec<String>), CliError> {
    let Some(obj) = v.as_object() else {
        return Err(invalid("sql_config", "must be a JSON object"));
    };
    for (k, val) in obj {
        let mut probe = serde_json::Map::new();
        probe.insert(k.clone(), val.clone());
        if let Err(e) = serde_json::from_value::<SqlConfig>(Json::Object(probe)) {
            return Err(invalid(k, e));
        }
    }
    let cfg: SqlConfig = serde_json::from_value(v.clone()).map_err(|e| invalid("sql_config", e))?;
    cfg.validate()?;
    let warnings = cfg.warnings();
    Ok((cfg, warnings))
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            table_config: TableConfig::default(),
            sql_config: SqlConfig::default(),
            template_set: SetName::General,
            style: SerializerStyle::Markdown,
            task: TaskStyle::SqlText,
            shots: SqlConfig::default().n_shot,
            budget: None,
            token_counter: TokenCounter::Whitespace,
            split: None,
            holdout_fraction: 0.25,
            warnings: Vec::new(),
        }
    }
}

impl GenConfig {
    pub fn from_json(v: &Json) -> Result<GenConfig, CliError> {
        let Some(obj) = v.as_object() else {
            return Err(invalid("config", "must be a JSON object"));
        };
        let mut cfg = GenConfig::default();
        for k in obj.keys() {
            if !GEN_CONFIG_KEYS.contains(&k.as_str()) {
                cfg.warnings.push(format!("unknown config key `{k}` ignored"));
            }
        }
        if let Some(t) = obj.get("table_config") {
            let (tc, w) = table_config_from_json(t)?;
            cfg.table_config = tc;
            cfg.warnings.extend(w);
        }
        if let Some(s) = obj.get("sql_config") {
            let (sc, w) = sql_config_from_json(s)?;
            cfg.shots = sc.n_shot;
            cfg.sql_config = sc;
            cfg.warnings.extend(w);
        }
        if let Some(name) = field::<String>(obj, "template_set")? {
            cfg.template_set = name.parse().map_err(|e: tabexec_core::GenError| invalid("template_set", e))?;
        }
        if let Some(s) = field(obj, "style")? {
            cfg.style = s;
        }
        if let Some(t) = field(obj, "task")? {
            cfg.task = t;
        }
        if let Some(n) = field(obj, "shots")? {
            cfg.shots = n;
        }
        cfg.budget = field(obj, "budget")?;
        if let Some(name) = field::<String>(obj, "token_counter")? {
            cfg.token_counter = TokenCounter::parse(&name).ok_or_else(|| invalid("token_counter", format!("unknown counter `{name}`")))?;
        }
        cfg.split = field(obj, "split")?;
        if let Some(f) = field::<f64>(obj, "holdout_fraction")? {
            if !(0.0..1.0).contains(&f) {
                return Err(invalid("holdout_fraction", "must lie in [0, 1)"));
            }
            cfg.holdout_fraction = f;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<GenConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let v: Json = serde_json::from_str(&text).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        GenConfig::from_json(&v)
    }
}

/// Table shape used for long-context mixtures: five columns and an integer
/// range wide enough for thousands of distinct values.
pub fn standard_table_config() -> TableConfig {
    TableConfig { int_range: (1, 100_000), ..TableConfig::default() }
}

/// Template sets mixed by `--standard`.
pub const STANDARD_SETS: [SetName; 8] = [
    SetName::Easy,
    SetName::General,
    SetName::Filter,
    SetName::Aggregate,
    SetName::Arithmetic,
    SetName::Superlative,
    SetName::Comparative,
    SetName::Group,
];

/// Prompt lengths mixed by `--standard`, in tokens.
pub const STANDARD_BUDGETS: [usize; 6] = [2048, 4096, 8192, 16384, 24576, 36864];
