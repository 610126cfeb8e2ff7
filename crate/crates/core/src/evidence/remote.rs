use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CountProvider, EvidenceError};

/// Settings for a generic search API that reports a total-results figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Request URL with a `{query}` placeholder. The placeholder receives the
    /// URL-encoded, double-quoted phrase.
    pub endpoint_template: String,
    /// Dotted JSON path to the count (`searchInformation.totalResults`,
    /// `hits.0.n`), or `regex:<pattern>` applied to the raw body with the
    /// count in capture group 1.
    pub count_path: String,
    #[serde(default)]
    pub min_delay_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    #[serde(default = "default_provider_id")]
    pub provider_id: String,
}

fn default_retries() -> u32 {
    2
}

fn default_timeout() -> u64 {
    10_000
}

fn default_provider_id() -> String {
    "remote".into()
}

impl RemoteConfig {
    pub fn new(endpoint_template: impl Into<String>, count_path: impl Into<String>) -> Self {
        Self {
            endpoint_template: endpoint_template.into(),
            count_path: count_path.into(),
            min_delay_ms: 0,
            max_retries: default_retries(),
            timeout_ms: default_timeout(),
            headers: BTreeMap::new(),
            provider_id: default_provider_id(),
        }
    }

    pub fn request_url(&self, phrase: &str) -> String {
        let quoted = format!("\"{phrase}\"");
        let encoded: String = url::form_urlencoded::byte_serialize(quoted.as_bytes()).collect();
        self.endpoint_template.replace("{query}", &encoded)
    }
}

/// Pulls the result count out of a response body.
#[derive(Debug, Clone)]
pub enum CountExtractor {
    JsonPath(Vec<String>),
    Pattern(Regex),
}

impl CountExtractor {
    pub fn parse(spec: &str) -> Result<Self, EvidenceError> {
        let bad = |why: &str| EvidenceError::BadCountPath(spec.to_string(), why.to_string());
        if let Some(pattern) = spec.strip_prefix("regex:") {
            let re = Regex::new(pattern).map_err(|e| bad(&e.to_string()))?;
            if re.captures_len() < 2 {
                return Err(bad("pattern needs a capture group"));
            }
            return Ok(Self::Pattern(re));
        }
        let segments: Vec<String> = spec.split('.').map(str::to_string).collect();
        if segments.iter().any(String::is_empty) {
            return Err(bad("empty path segment"));
        }
        Ok(Self::JsonPath(segments))
    }

    pub fn extract(&self, body: &str) -> Result<u64, String> {
        match self {
            Self::Pattern(re) => {
                let caps = re.captures(body).ok_or("count pattern did not match")?;
                parse_count_text(caps.get(1).map_or("", |m| m.as_str()))
            }
            Self::JsonPath(path) => {
                let root: Value = serde_json::from_str(body).map_err(|e| format!("invalid JSON: {e}"))?;
                let mut node = &root;
                for seg in path {
                    node = match node {
                        Value::Object(map) => map.get(seg),
                        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
                        _ => None,
                    }
                    .ok_or_else(|| format!("path segment `{seg}` not found"))?;
                }
                match node {
                    Value::Number(n) => n
                        .as_u64()
                        .or_else(|| n.as_f64().filter(|f| *f >= 0.0 && f.fract() == 0.0).map(|f| f as u64))
                        .ok_or_else(|| format!("count {n} is not a non-negative integer")),
                    Value::String(s) => parse_count_text(s),
                    other => Err(format!("count has unexpected type: {other}")),
                }
            }
        }
    }
}

/// Accepts digits with `,`, `_`, `.` or space as thousands separators.
fn parse_count_text(text: &str) -> Result<u64, String> {
    let digits: String = text
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '_' | ' ' | '.' | '\u{a0}'))
        .collect();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("`{text}` is not a count"));
    }
    digits.parse().map_err(|e| format!("`{text}`: {e}"))
}

/// HTTP GET returning the response body; non-success statuses are errors.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, headers: &BTreeMap<String, String>, timeout: Duration) -> Result<String, String>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, EvidenceError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| EvidenceError::Transport {
                phrase: String::new(),
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, headers: &BTreeMap<String, String>, timeout: Duration) -> Result<String, String> {
        let mut req = self.client.get(url).timeout(timeout);
        for (k, v) in headers {
            req = req.header(k, v);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        resp.text().map_err(|e| e.to_string())
    }
}

/// Search-API count provider. The minimum delay between requests is shared
/// by every caller of one client.
pub struct RemoteClient<T = HttpTransport> {
    config: RemoteConfig,
    extractor: CountExtractor,
    transport: T,
    last_request: Mutex<Option<Instant>>,
}

impl RemoteClient<HttpTransport> {
    pub fn http(config: RemoteConfig) -> Result<Self, EvidenceError> {
        Self::with_transport(config, HttpTransport::new()?)
    }
}

impl<T: Transport> RemoteClient<T> {
    pub fn with_transport(config: RemoteConfig, transport: T) -> Result<Self, EvidenceError> {
        if !config.endpoint_template.contains("{query}") {
            return Err(EvidenceError::BadCountPath(
                config.endpoint_template.clone(),
                "endpoint template lacks `{query}`".into(),
            ));
        }
        Ok(Self {
            extractor: CountExtractor::parse(&config.count_path)?,
            config,
            transport,
            last_request: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn wait_turn(&self) {
        let min = Duration::from_millis(self.config.min_delay_ms);
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let since = prev.elapsed();
            if since < min {
                std::thread::sleep(min - since);
            }
        }
        *last = Some(Instant::now());
    }

    /// Queries the endpoint for the exact phrase, retrying up to
    /// `max_retries` times. Failures never turn into a zero count.
    pub fn fetch_count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        let url = self.config.request_url(phrase);
        let timeout = Duration::from_millis(self.config.timeout_ms);
        let attempts = self.config.max_retries + 1;
        let mut message = String::new();
        for attempt in 1..=attempts {
            self.wait_turn();
            match self.transport.get(&url, &self.config.headers, timeout) {
                Ok(body) => match self.extractor.extract(&body) {
                    Ok(n) => return Ok(n),
                    Err(e) => message = e,
                },
                Err(e) => message = e,
            }
            log::warn!("count request for `{phrase}` failed (attempt {attempt}/{attempts}): {message}");
        }
        Err(EvidenceError::Transport {
            phrase: phrase.to_string(),
            attempts,
            message,
        })
    }
}

impl<T: Transport> CountProvider for RemoteClient<T> {
    fn id(&self) -> &str {
        &self.config.provider_id
    }

    fn count(&self, phrase: &str) -> Result<u64, EvidenceError> {
        self.fetch_count(phrase)
    }
}
