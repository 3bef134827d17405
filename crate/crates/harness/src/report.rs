use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{position_curve, CurveMode, CurvePoint};
use crate::metrics::EXTRACTION_RULE;
use crate::runner::EvalRecord;

/// Prompts strictly shorter than this many tokens are short-context.
pub const SHORT_CONTEXT_MAX: usize = 4096;
/// Prompts up to and including this many tokens are long-context; beyond is overflow.
pub const LONG_CONTEXT_MAX: usize = 40960;
/// Attribute keys broken out in the report.
pub const REPORT_ATTRIBUTES: [&str; 4] = ["calculate_times", "filter_times", "sql_length", "keywords"];
pub const ROW_GRANULARITY: f64 = 20.0;
pub const TOKEN_GRANULARITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("no records")]
    EmptyInput,
    #[error("invalid curve mode: {0}")]
    InvalidMode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Bucket {
    pub count: usize,
    pub correct: usize,
    /// `None` for an empty bucket.
    pub em: Option<f64>,
}

impl Bucket {
    fn add(&mut self, em: u8) {
        self.count += 1;
        self.correct += em as usize;
        self.em = Some(self.correct as f64 / self.count as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub extraction_rule: String,
    /// Micro average over every record.
    pub total: Bucket,
    pub short_context: Bucket,
    pub long_context: Bucket,
    pub overflow: Bucket,
    /// Records whose request failed and were scored 0.
    pub failures: usize,
    pub per_template: BTreeMap<String, Bucket>,
    pub per_reasoning_type: BTreeMap<String, Bucket>,
    pub per_attribute: BTreeMap<String, BTreeMap<String, Bucket>>,
    pub position_by_row: Vec<CurvePoint<f64>>,
    pub position_by_token: Vec<CurvePoint<f64>>,
}

fn attribute_key(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(a) => a.iter().map(attribute_key).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

pub fn split_report(records: &[EvalRecord]) -> Result<Report, ReportError> {
    if records.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let mut r = Report {
        extraction_rule: EXTRACTION_RULE.into(),
        total: Bucket::default(),
        short_context: Bucket::default(),
        long_context: Bucket::default(),
        overflow: Bucket::default(),
        failures: 0,
        per_template: BTreeMap::new(),
        per_reasoning_type: BTreeMap::new(),
        per_attribute: BTreeMap::new(),
        position_by_row: Vec::new(),
        position_by_token: Vec::new(),
    };
    for rec in records {
        r.total.add(rec.em);
        match rec.token_count {
            n if n < SHORT_CONTEXT_MAX => r.short_context.add(rec.em),
            n if n <= LONG_CONTEXT_MAX => r.long_context.add(rec.em),
            _ => r.overflow.add(rec.em),
        }
        r.failures += usize::from(rec.error.is_some());
        r.per_template.entry(rec.template.clone()).or_default().add(rec.em);
        r.per_reasoning_type.entry(rec.reasoning_type.clone()).or_default().add(rec.em);
        for key in REPORT_ATTRIBUTES {
            if let Some(v) = rec.attributes.get(key) {
                r.per_attribute.entry(key.into()).or_default().entry(attribute_key(v)).or_default().add(rec.em);
            }
        }
    }
    let rows: Vec<(f64, f64)> = records.iter().filter_map(|x| x.answer_row.map(|p| (p as f64, x.em as f64))).collect();
    if !rows.is_empty() {
        r.position_by_row = position_curve(&rows, CurveMode::Grouped(ROW_GRANULARITY))?;
    }
    let toks: Vec<(f64, f64)> = records.iter().filter_map(|x| x.answer_position.map(|p| (p, x.em as f64))).collect();
    if !toks.is_empty() {
        r.position_by_token = position_curve(&toks, CurveMode::Grouped(TOKEN_GRANULARITY))?;
    }
    Ok(r)
}

fn pct(b: &Bucket) -> String {
    b.em.map_or("-".into(), |e| format!("{:.1}%", e * 100.0))
}

fn section(out: &mut String, title: &str, rows: &[(String, &Bucket)]) {
    let w = rows.iter().map(|(k, _)| k.len()).chain([title.len()]).max().unwrap_or(0);
    let _ = writeln!(out, "{title:<w$}  {:>7}  {:>7}  {:>7}", "records", "correct", "EM");
    for (k, b) in rows {
        let _ = writeln!(out, "{k:<w$}  {:>7}  {:>7}  {:>7}", b.count, b.correct, pct(b));
    }
    out.push('\n');
}

fn numeric_order(m: &BTreeMap<String, Bucket>) -> Vec<(String, &Bucket)> {
    let mut v: Vec<(String, &Bucket)> = m.iter().map(|(k, b)| (k.clone(), b)).collect();
    v.sort_by(|a, b| match (a.0.parse::<f64>(), b.0.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.0.cmp(&b.0),
    });
    v
}

impl Report {
    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "answer extraction: {}\n", self.extraction_rule);
        section(
            &mut out,
            "context length",
            &[
                ("total".into(), &self.total),
                (format!("short (<{SHORT_CONTEXT_MAX})"), &self.short_context),
                (format!("long ({SHORT_CONTEXT_MAX}-{LONG_CONTEXT_MAX})"), &self.long_context),
                (format!("overflow (>{LONG_CONTEXT_MAX})"), &self.overflow),
            ],
        );
        let _ = writeln!(out, "failed requests: {}\n", self.failures);
        section(&mut out, "reasoning type", &numeric_order(&self.per_reasoning_type));
        section(&mut out, "template", &numeric_order(&self.per_template));
        for (k, m) in &self.per_attribute {
            section(&mut out, k, &numeric_order(m));
        }
        for (title, curve) in [("answer row", &self.position_by_row), ("answer token position", &self.position_by_token)] {
            if curve.is_empty() {
                continue;
            }
            let owned: Vec<(String, Bucket)> = curve
                .iter()
                .map(|p| {
                    let label = format!("({}, {}]", trim_float(p.start), trim_float(p.end));
                    (label, Bucket { count: p.count, correct: (p.em * p.count as f64).round() as usize, em: Some(p.em) })
                })
                .collect();
            let rows: Vec<(String, &Bucket)> = owned.iter().map(|(k, b)| (k.clone(), b)).collect();
            section(&mut out, title, &rows);
        }
        out
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
