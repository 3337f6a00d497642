//! Chat-completion client over HTTP with retries and a client-side rate limit.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CompletionBackend, CompletionRequest, CompletionResponse, LlmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    /// Base URL, e.g. `https://api.example.com`.
    pub endpoint: String,
    pub path: String,
    /// Name of the environment variable holding the bearer token.
    pub key_env: String,
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    /// Requests per minute; 0 disables the limiter.
    pub rate_limit: u32,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "https://api.openai.com".into(),
            path: "/v1/chat/completions".into(),
            key_env: "OPENAI_API_KEY".into(),
            max_attempts: 3,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
            rate_limit: 60,
            timeout_secs: 120,
        }
    }
}

impl HttpConfig {
    pub fn url(&self) -> String {
        format!(
            "{}/{}",
            self.endpoint.trim_end_matches('/'),
            self.path.trim_start_matches('/')
        )
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << (attempt.saturating_sub(1)).min(20);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Time source for the limiter and the backoff sleeps.
pub trait Clock: Send + Sync {
    /// Time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// A clock that only moves when slept on. Handy in tests and dry runs.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

const WINDOW: Duration = Duration::from_secs(61);

/// Sliding-window limiter: a request may leave when at most `limit` requests
/// left during the preceding 61 seconds, so any 61-second window sees at most
/// `limit + 1` departures.
pub struct RateLimiter {
    limit: u32,
    clock: Arc<dyn Clock>,
    departures: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(limit: u32, clock: Arc<dyn Clock>) -> RateLimiter {
        RateLimiter {
            limit,
            clock,
            departures: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a request may leave, records its departure, and returns it.
    pub fn acquire(&self) -> Duration {
        loop {
            let wait = {
                let mut q = self.departures.lock().unwrap();
                let now = self.clock.now();
                if self.limit == 0 {
                    return now;
                }
                while q.front().is_some_and(|&d| now.saturating_sub(d) > WINDOW) {
                    q.pop_front();
                }
                if q.len() <= self.limit as usize {
                    q.push_back(now);
                    return now;
                }
                q[0] + WINDOW + Duration::from_nanos(1) - now
            };
            self.clock.sleep(wait);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Connect(String),
    Other(String),
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportError::Timeout => f.write_str("request timed out"),
            TransportError::Connect(m) => write!(f, "connection failed: {m}"),
            TransportError::Other(m) => f.write_str(m),
        }
    }
}

/// One HTTP POST. Returns the status code and the response body.
pub trait Transport: Send + Sync {
    fn post(&self, url: &str, bearer: &str, body: &serde_json::Value, timeout: Duration) -> Result<(u16, String), TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<ReqwestTransport, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| LlmError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn post(&self, url: &str, bearer: &str, body: &serde_json::Value, timeout: Duration) -> Result<(u16, String), TransportError> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(bearer)
            .timeout(timeout)
            .json(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    TransportError::Timeout
                } else if e.is_connect() {
                    TransportError::Connect(e.to_string())
                } else {
                    TransportError::Other(e.to_string())
                }
            })?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| TransportError::Other(e.to_string()))?;
        Ok((status, text))
    }
}

pub struct ChatClient {
    config: HttpConfig,
    key: String,
    transport: Box<dyn Transport>,
    limiter: RateLimiter,
    clock: Arc<dyn Clock>,
}

impl ChatClient {
    /// Reads the key from the configured environment variable. Fails before
    /// any network activity when it is unset or empty.
    pub fn from_env(config: HttpConfig) -> Result<ChatClient, LlmError> {
        let key = read_key(&config.key_env)?;
        let transport = Box::new(ReqwestTransport::new()?);
        Ok(ChatClient::with_transport(config, key, transport, Arc::new(SystemClock::default())))
    }

    pub fn with_transport(config: HttpConfig, key: String, transport: Box<dyn Transport>, clock: Arc<dyn Clock>) -> ChatClient {
        let limiter = RateLimiter::new(config.rate_limit, clock.clone());
        ChatClient {
            config,
            key,
            transport,
            limiter,
            clock,
        }
    }

    fn body(&self, req: &CompletionRequest) -> serde_json::Value {
        json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
    }
}

pub fn read_key(var: &str) -> Result<String, LlmError> {
    match std::env::var(var) {
        Ok(k) if !k.trim().is_empty() => Ok(k),
        _ => Err(LlmError::Config(format!("environment variable {var} is not set"))),
    }
}

enum Failure {
    Retry(String),
    Fatal(LlmError),
}

fn interpret(status: u16, body: &str) -> Result<(String, serde_json::Value), Failure> {
    match status {
        200..=299 => {}
        401 | 403 => return Err(Failure::Fatal(LlmError::Auth(status))),
        429 | 500..=599 => return Err(Failure::Retry(format!("HTTP {status}"))),
        _ => {
            return Err(Failure::Fatal(LlmError::Provider {
                status,
                body: body.chars().take(500).collect(),
            }))
        }
    }
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| Failure::Fatal(LlmError::Malformed(e.to_string())))?;
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Failure::Fatal(LlmError::Malformed("missing choices[0].message.content".into())))?;
    if text.is_empty() {
        return Err(Failure::Fatal(LlmError::Malformed("empty completion".into())));
    }
    Ok((text.to_owned(), value))
}

impl CompletionBackend for ChatClient {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        req.validate()?;
        let url = self.config.url();
        let body = self.body(req);
        let timeout = Duration::from_secs(self.config.timeout_secs.max(1));
        let attempts = self.config.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            let start = self.limiter.acquire();
            let outcome = match self.transport.post(&url, &self.key, &body, timeout) {
                Ok((status, text)) => interpret(status, &text),
                Err(e) => Err(Failure::Retry(e.to_string())),
            };
            match outcome {
                Ok((text, value)) => {
                    log::info!("request {} succeeded on attempt {attempt}", req.request_id);
                    let usage = |k: &str| value.pointer(&format!("/usage/{k}")).and_then(|v| v.as_u64()).map(|v| v as u32);
                    return Ok(CompletionResponse {
                        text,
                        prompt_tokens: usage("prompt_tokens"),
                        completion_tokens: usage("completion_tokens"),
                        latency_ms: self.clock.now().saturating_sub(start).as_millis() as u64,
                        attempts: attempt,
                        provider: json!({
                            "id": value.get("id").cloned().unwrap_or_default(),
                            "model": value.get("model").cloned().unwrap_or_default(),
                        }),
                    });
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry(msg)) => {
                    log::warn!("request {} attempt {attempt}/{attempts} failed: {msg}", req.request_id);
                    last = msg;
                    if attempt < attempts {
                        self.clock.sleep(self.config.backoff(attempt));
                    }
                }
            }
        }
        Err(LlmError::Exhausted { attempts, last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Scripted {
        replies: Mutex<VecDeque<Result<(u16, String), TransportError>>>,
        calls: Mutex<u32>,
    }

    impl Scripted {
        fn new(replies: Vec<Result<(u16, String), TransportError>>) -> Scripted {
            Scripted {
                replies: Mutex::new(replies.into()),
                calls: Mutex::new(0),
            }
        }
    }

    impl Transport for Arc<Scripted> {
        fn post(&self, _: &str, bearer: &str, body: &serde_json::Value, _: Duration) -> Result<(u16, String), TransportError> {
            assert_eq!(bearer, "k");
            assert_eq!(body["messages"][0]["role"], "user");
            *self.calls.lock().unwrap() += 1;
            self.replies.lock().unwrap().pop_front().expect("unexpected extra request")
        }
    }

    fn ok_body(text: &str) -> Result<(u16, String), TransportError> {
        Ok((200, json!({"choices": [{"message": {"content": text}}], "usage": {"prompt_tokens": 5, "completion_tokens": 2}}).to_string()))
    }

    fn client(script: Arc<Scripted>, attempts: u32) -> (ChatClient, Arc<ManualClock>) {
        let clock = Arc::new(ManualClock::default());
        let config = HttpConfig {
            max_attempts: attempts,
            ..HttpConfig::default()
        };
        (ChatClient::with_transport(config, "k".into(), Box::new(script), clock.clone()), clock)
    }

    #[test]
    fn retries_transient_failures() {
        let script = Arc::new(Scripted::new(vec![
            Ok((503, String::new())),
            Err(TransportError::Timeout),
            ok_body("hello"),
        ]));
        let (c, clock) = client(script.clone(), 3);
        let r = c.complete(&CompletionRequest::new("p", "m")).unwrap();
        assert_eq!(r.text, "hello");
        assert_eq!(r.attempts, 3);
        assert_eq!(r.prompt_tokens, Some(5));
        assert_eq!(*script.calls.lock().unwrap(), 3);
        // 500 ms then 1000 ms of backoff.
        assert_eq!(clock.now(), Duration::from_millis(1500));
    }

    #[test]
    fn exhausts_and_reports() {
        let script = Arc::new(Scripted::new(vec![Ok((429, String::new())), Ok((500, String::new()))]));
        let (c, _) = client(script, 2);
        let err = c.complete(&CompletionRequest::new("p", "m")).unwrap_err();
        assert!(matches!(err, LlmError::Exhausted { attempts: 2, .. }), "{err}");
    }

    #[test]
    fn auth_and_payload_errors_are_not_retried() {
        let script = Arc::new(Scripted::new(vec![Ok((401, String::new()))]));
        let (c, _) = client(script, 3);
        assert!(matches!(c.complete(&CompletionRequest::new("p", "m")), Err(LlmError::Auth(401))));
        let script = Arc::new(Scripted::new(vec![Ok((200, "{\"choices\": []}".into()))]));
        let (c, _) = client(script, 3);
        assert!(matches!(c.complete(&CompletionRequest::new("p", "m")), Err(LlmError::Malformed(_))));
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let config = HttpConfig {
            key_env: "LEDUC_TOM_TEST_SURELY_UNSET".into(),
            ..HttpConfig::default()
        };
        assert!(matches!(ChatClient::from_env(config), Err(LlmError::Config(_))));
    }

    #[test]
    fn limiter_bounds_every_window() {
        let clock = Arc::new(ManualClock::default());
        let limiter = RateLimiter::new(5, clock.clone());
        let mut times = Vec::new();
        for i in 0..40 {
            times.push(limiter.acquire());
            clock.advance(Duration::from_millis(700 * (i % 3)));
        }
        for (i, &t) in times.iter().enumerate() {
            let n = times[i..].iter().take_while(|&&u| u - t <= WINDOW).count();
            assert!(n <= 6, "{n} departures in the window starting at {t:?}");
        }
    }
}
