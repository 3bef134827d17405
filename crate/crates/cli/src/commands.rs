use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tabexec_core::render::parse_markdown;
use tabexec_core::{execute, parse, Table};
use tabexec_harness::{kendall_tau, pearson, run_eval, split_report, EvalItem, EvalRecord, ModelEndpoint, Report};

use crate::dataset::DatasetLine;
use crate::error::CliError;
use crate::fsutil::{read_jsonl, read_jsonl_tolerant, sidecar, write_json, write_jsonl};

/// Reads a table from JSON or from a markdown block.
pub fn load_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    let table = if is_json {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
        Table::from_json(v)?
    } else {
        parse_markdown(&text)?
    };
    Ok(table)
}

/// `exec`: the engine's answer in gold-answer form.
pub fn cmd_exec(sql: &str, table_path: &Path) -> Result<String, CliError> {
    let table = load_table(table_path)?;
    let q = parse(sql)?;
    Ok(execute(&q, &table)?.display())
}

pub fn eval_item(line: &DatasetLine) -> EvalItem {
    let first_row = line.answer_rows.first().or(line.answer_positions.first().map(|p| &p.row));
    let answer_position = match (line.answer_positions.first(), line.table_token_count) {
        (Some(p), n) if n > 0 => Some(p.token_index as f64 / n as f64),
        _ => None,
    };
    EvalItem {
        id: line.id.clone(),
        prompt: line.prompt.clone(),
        gold: line.gold.clone(),
        token_count: line.token_count,
        template: line.template.clone(),
        reasoning_type: line.reasoning_type.to_string(),
        attributes: serde_json::to_value(&line.attributes).expect("attributes serialize"),
        answer_row: first_row.map(|r| r + 1),
        answer_position,
    }
}

/// `mock://gold` style shorthands or a JSON endpoint file.
pub fn load_endpoint(target: &str) -> Result<ModelEndpoint, CliError> {
    if target.starts_with("mock://") {
        return Ok(ModelEndpoint::new(target, "mock"));
    }
    let path = Path::new(target);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::ConfigInvalid { key: "endpoint".into(), message: e.to_string() })
}

#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub dataset: PathBuf,
    pub endpoint: ModelEndpoint,
    pub out: PathBuf,
    /// Ignore records already present at `out`.
    pub fresh: bool,
}

/// `eval`: appends records as they finish, then rewrites the file in
/// dataset order.
pub fn cmd_eval(req: &EvalRequest) -> Result<Vec<EvalRecord>, CliError> {
    let lines: Vec<DatasetLine> = read_jsonl(&req.dataset)?;
    let items: Vec<EvalItem> = lines.iter().map(eval_item).collect();
    let ids: HashSet<&str> = items.iter().map(|i| i.id.as_str()).collect();
    let done: Vec<EvalRecord> = if !req.fresh && req.out.exists() {
        read_jsonl_tolerant::<EvalRecord>(&req.out)?.into_iter().filter(|r| ids.contains(r.id.as_str())).collect()
    } else {
        Vec::new()
    };
    write_jsonl(&req.out, &done)?;
    let client = req.endpoint.client()?;
    let mut file = OpenOptions::new().append(true).open(&req.out).map_err(|e| CliError::io(&req.out, e))?;
    let mut sink = |r: &EvalRecord| -> std::io::Result<()> {
        serde_json::to_writer(&mut file, r)?;
        file.write_all(b"\n")?;
        file.flush()
    };
    let records = run_eval(&items, client.as_ref(), &req.endpoint, &done, &mut sink)?;
    drop(file);
    write_jsonl(&req.out, &records)?;
    Ok(records)
}

/// `report`: the text table, with the JSON form written beside the records.
pub fn cmd_report(records_path: &Path, json_out: Option<&Path>) -> Result<(Report, String, PathBuf), CliError> {
    let records: Vec<EvalRecord> = read_jsonl(records_path)?;
    let report = split_report(&records)?;
    let out = json_out.map(Path::to_path_buf).unwrap_or_else(|| sidecar(records_path, "report.json"));
    write_json(&out, &report)?;
    let text = report.to_text();
    Ok((report, text, out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub models: Vec<String>,
    pub pearson: f64,
    pub kendall_tau: f64,
}

/// Two columns per line, model then score, split on a comma, tab or spaces.
/// Blank lines and `#` comments are skipped, as is a first line whose score
/// does not parse.
pub fn read_scores(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BTreeMap::new();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| CliError::BadLine { path: path.to_path_buf(), line: i + 1, message };
        let (model, score) = match line.rsplit_once([',', '\t']) {
            Some(p) => p,
            None => line.rsplit_once(' ').ok_or_else(|| bad("expected `model, score`".into()))?,
        };
        let model = model.trim().trim_matches('"').to_string();
        let score = score.trim();
        let value = match score.parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ if first => {
                first = false;
                continue;
            }
            _ => return Err(bad(format!("score `{score}` is not a number"))),
        };
        first = false;
        if out.insert(model.clone(), value).is_some() {
            return Err(bad(format!("model `{model}` listed twice")));
        }
    }
    Ok(out)
}

/// `correlate`: coefficients over the models both files score.
pub fn cmd_correlate(a: &Path, b: &Path) -> Result<Correlation, CliError> {
    let xs = read_scores(a)?;
    let ys = read_scores(b)?;
    let models: Vec<String> = xs.keys().filter(|m| ys.contains_key(*m)).cloned().collect();
    let x: Vec<f64> = models.iter().map(|m| xs[m]).collect();
    let y: Vec<f64> = models.iter().map(|m| ys[m]).collect();
    let r = pearson(&x, &y)?;
    let t = kendall_tau(&x, &y)?;
    Ok(Correlation { models, pearson: r, kendall_tau: t })
}
