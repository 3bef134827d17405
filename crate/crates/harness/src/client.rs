use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::runner::{EvalItem, HarnessError};

/// Where and how to reach a completion model. Holds the name of the variable
/// with the API key, never the key itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    /// HTTP(S) URL, or `mock://gold` / `mock://empty`.
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// First retry delay; doubles on each further retry.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub requests_per_second: Option<f64>,
    /// Dotted path to the completion text; numeric segments index arrays.
    #[serde(default = "default_path")]
    pub response_path: String,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Send `messages` instead of `prompt`.
    #[serde(default)]
    pub chat: bool,
}

fn default_concurrency() -> usize {
    4
}
fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    500
}
fn default_path() -> String {
    "choices.0.text".into()
}
fn default_max_tokens() -> u32 {
    256
}

impl ModelEndpoint {
    pub fn new(base_url: &str, model: &str) -> Self {
        ModelEndpoint {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            max_concurrency: default_concurrency(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
            requests_per_second: None,
            response_path: default_path(),
            max_tokens: default_max_tokens(),
            chat: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidEndpoint(m.into()));
        if self.max_concurrency == 0 {
            return bad("max_concurrency must be at least 1");
        }
        if !(self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if matches!(self.requests_per_second, Some(r) if !(r > 0.0)) {
            return bad("requests_per_second must be positive");
        }
        if self.response_path.is_empty() {
            return bad("response_path must not be empty");
        }
        Ok(())
    }

    pub fn client(&self) -> Result<Box<dyn Client>, HarnessError> {
        self.validate()?;
        match self.base_url.strip_prefix("mock://") {
            Some("gold") => Ok(Box::new(MockClient::Gold)),
            Some("empty") => Ok(Box::new(MockClient::Empty)),
            Some(other) => Err(HarnessError::InvalidEndpoint(format!("unknown mock endpoint `{other}`"))),
            None => Ok(Box::new(HttpClient::new(self.clone())?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub latency_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallError {
    /// No response at all: refused connection, DNS failure, timeout.
    Unreachable(String),
    /// Worth retrying: rate limiting or a server error.
    Transient(String),
    /// Retrying will not help.
    Permanent(String),
}

impl CallError {
    pub fn message(&self) -> &str {
        match self {
            CallError::Unreachable(m) | CallError::Transient(m) | CallError::Permanent(m) => m,
        }
    }
}

pub trait Client: Send + Sync {
    fn complete(&self, item: &EvalItem) -> Result<Completion, CallError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockClient {
    /// Answers with the gold answer.
    Gold,
    /// Answers with an empty string.
    Empty,
}

impl Client for MockClient {
    fn complete(&self, item: &EvalItem) -> Result<Completion, CallError> {
        let text = match self {
            MockClient::Gold => item.gold.clone(),
            MockClient::Empty => String::new(),
        };
        Ok(Completion { text, latency_ms: None })
    }
}

/// Looks up a dotted path such as `choices.0.message.content`.
pub fn json_path<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, seg| match seg.parse::<usize>() {
        Ok(i) if cur.is_array() => cur.get(i),
        _ => cur.get(seg),
    })
}

pub struct HttpClient {
    endpoint: ModelEndpoint,
    agent: ureq::Agent,
    key: Option<String>,
}

impl HttpClient {
    pub fn new(endpoint: ModelEndpoint) -> Result<Self, HarnessError> {
        let key = match &endpoint.api_key_env {
            None => None,
            Some(var) => Some(std::env::var(var).map_err(|_| {
                HarnessError::InvalidEndpoint(format!("environment variable `{var}` is not set"))
            })?),
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(endpoint.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpClient { endpoint, agent, key })
    }

    fn body(&self, prompt: &str) -> Value {
        let e = &self.endpoint;
        if e.chat {
            json!({"model": e.model, "messages": [{"role": "user", "content": prompt}], "max_tokens": e.max_tokens, "temperature": 0})
        } else {
            json!({"model": e.model, "prompt": prompt, "max_tokens": e.max_tokens, "temperature": 0})
        }
    }
}

impl Client for HttpClient {
    fn complete(&self, item: &EvalItem) -> Result<Completion, CallError> {
        let started = Instant::now();
        let mut req = self.agent.post(&self.endpoint.base_url);
        if let Some(k) = &self.key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let resp = req.send_json(self.body(&item.prompt)).map_err(|e| match e {
            ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => {
                CallError::Unreachable(e.to_string())
            }
            other => CallError::Permanent(other.to_string()),
        })?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(CallError::Transient(format!("HTTP {status}")));
        }
        if status >= 400 {
            return Err(CallError::Permanent(format!("HTTP {status}")));
        }
        let v: Value = resp.into_body().read_json().map_err(|e| CallError::Permanent(format!("bad response body: {e}")))?;
        let text = match json_path(&v, &self.endpoint.response_path) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
            None => return Err(CallError::Permanent(format!("response has no `{}`", self.endpoint.response_path))),
        };
        Ok(Completion { text, latency_ms: Some(started.elapsed().as_millis() as u64) })
    }
}

/// Token bucket shared by the request workers.
pub struct RateLimiter {
    rate: Option<f64>,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(requests_per_second: Option<f64>) -> Self {
        let cap = requests_per_second.map_or(1.0, |r| r.max(1.0));
        RateLimiter { rate: requests_per_second, state: Mutex::new((cap, Instant::now())) }
    }

    pub fn acquire(&self) {
        let Some(rate) = self.rate else { return };
        let cap = rate.max(1.0);
        loop {
            let wait = {
                let mut s = self.state.lock().expect("limiter lock");
                let now = Instant::now();
                s.0 = (s.0 + now.duration_since(s.1).as_secs_f64() * rate).min(cap);
                s.1 = now;
                if s.0 >= 1.0 {
                    s.0 -= 1.0;
                    return;
                }
                (1.0 - s.0) / rate
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}
