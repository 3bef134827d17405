use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{CallError, Client, Completion, ModelEndpoint, RateLimiter};
use crate::metrics::{canonical, normalize};

/// One prompt to score, with the metadata the reports group by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub prompt: String,
    pub gold: String,
    pub token_count: usize,
    pub template: String,
    pub reasoning_type: String,
    #[serde(default)]
    pub attributes: serde_json::Value,
    /// 1-based row of the first answer cell.
    #[serde(default)]
    pub answer_row: Option<usize>,
    /// First answer token index over the table's token count.
    #[serde(default)]
    pub answer_position: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub token_count: usize,
    pub model_output: String,
    pub normalized_pred: String,
    pub gold: String,
    pub em: u8,
    #[serde(default)]
    pub latency_ms: Option<u64>,
    #[serde(default)]
    pub error: Option<String>,
    pub template: String,
    pub reasoning_type: String,
    #[serde(default)]
    pub attributes: serde_json::Value,
    #[serde(default)]
    pub answer_row: Option<usize>,
    #[serde(default)]
    pub answer_position: Option<f64>,
}

impl EvalRecord {
    pub fn score(item: &EvalItem, output: &str, latency_ms: Option<u64>, error: Option<String>) -> Self {
        let pred = normalize(output);
        let em = u8::from(pred == normalize(&item.gold));
        EvalRecord {
            id: item.id.clone(),
            token_count: item.token_count,
            model_output: output.to_string(),
            normalized_pred: canonical(&pred),
            gold: item.gold.clone(),
            em,
            latency_ms,
            error,
            template: item.template.clone(),
            reasoning_type: item.reasoning_type.clone(),
            attributes: item.attributes.clone(),
            answer_row: item.answer_row,
            answer_position: item.answer_position,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("endpoint unreachable after retries: {message} ({completed} records kept)")]
    EndpointUnreachable { message: String, completed: usize },
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
    #[error("duplicate example id `{0}`")]
    DuplicateId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

enum Outcome {
    Done(EvalRecord),
    Unreachable(String),
}

fn call_with_retries(item: &EvalItem, client: &dyn Client, ep: &ModelEndpoint, limiter: &RateLimiter) -> Outcome {
    let mut last = CallError::Unreachable(String::new());
    for attempt in 0..=ep.max_retries {
        if attempt > 0 {
            let delay = ep.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(16));
            std::thread::sleep(Duration::from_millis(delay));
        }
        limiter.acquire();
        match client.complete(item) {
            Ok(Completion { text, latency_ms }) => return Outcome::Done(EvalRecord::score(item, &text, latency_ms, None)),
            Err(CallError::Permanent(m)) => return Outcome::Done(EvalRecord::score(item, "", None, Some(m))),
            Err(e) => last = e,
        }
    }
    match last {
        CallError::Unreachable(m) => Outcome::Unreachable(m),
        e => Outcome::Done(EvalRecord::score(item, "", None, Some(format!("retries exhausted: {}", e.message())))),
    }
}

/// Scores every item, reusing `done` records by id.
///
/// New records reach `sink` in item order as soon as every earlier item is
/// finished, so a killed run leaves a valid prefix behind. Returns all records
/// in item order.
pub fn run_eval(
    items: &[EvalItem],
    client: &dyn Client,
    endpoint: &ModelEndpoint,
    done: &[EvalRecord],
    sink: &mut dyn FnMut(&EvalRecord) -> std::io::Result<()>,
) -> Result<Vec<EvalRecord>, HarnessError> {
    endpoint.validate()?;
    let mut seen = HashMap::with_capacity(items.len());
    for it in items {
        if seen.insert(it.id.as_str(), ()).is_some() {
            return Err(HarnessError::DuplicateId(it.id.clone()));
        }
    }
    let prior: HashMap<&str, &EvalRecord> = done.iter().map(|r| (r.id.as_str(), r)).collect();
    let todo: Vec<usize> = (0..items.len()).filter(|&i| !prior.contains_key(items[i].id.as_str())).collect();

    let limiter = RateLimiter::new(endpoint.requests_per_second);
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
    let mut fresh: BTreeMap<usize, EvalRecord> = BTreeMap::new();
    let mut failure: Option<(usize, String)> = None;
    let mut emitted = 0usize;
    let mut io_err: Option<std::io::Error> = None;

    std::thread::scope(|s| {
        for _ in 0..endpoint.max_concurrency.min(todo.len()) {
            let tx = tx.clone();
            let (next, stop, todo, limiter) = (&next, &stop, &todo, &limiter);
            s.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&i) = todo.get(k) else { break };
                let out = call_with_retries(&items[i], client, endpoint, limiter);
                if matches!(out, Outcome::Unreachable(_)) {
                    stop.store(true, Ordering::SeqCst);
                }
                if tx.send((k, out)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (k, out) in rx {
            match out {
                Outcome::Done(r) if failure.as_ref().is_none_or(|(fk, _)| k < *fk) => {
                    fresh.insert(k, r);
                }
                Outcome::Done(_) => {}
                Outcome::Unreachable(m) => {
                    if failure.as_ref().is_none_or(|(fk, _)| k < *fk) {
                        failure = Some((k, m));
                    }
                    fresh.retain(|&j, _| j < k);
                    stop.store(true, Ordering::SeqCst);
                }
            }
            if io_err.is_none() {
                while let Some(r) = fresh.get(&emitted) {
                    if let Err(e) = sink(r) {
                        io_err = Some(e);
                        stop.store(true, Ordering::SeqCst);
                        break;
                    }
                    emitted += 1;
                }
            }
        }
    });

    if let Some(e) = io_err {
        return Err(e.into());
    }
    if let Some((_, message)) = failure {
        return Err(HarnessError::EndpointUnreachable { message, completed: done.len() + emitted });
    }
    let mut fresh = fresh.into_values();
    Ok(items
        .iter()
        .map(|it| match prior.get(it.id.as_str()) {
            Some(r) => (*r).clone(),
            None => fresh.next().expect("one fresh record per pending item"),
        })
        .collect())
}
