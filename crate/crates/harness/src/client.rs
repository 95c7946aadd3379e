//! Model clients: an OpenAI-compatible HTTP client and a scripted mock.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;
use serde_json::{json, Value};

use crate::config::{ModelConfig, RetryPolicy, API_KEY_VAR};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelRequest {
    pub id: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Value>,
}

impl Completion {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            usage: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    /// Worth retrying: timeouts, connection resets, 429 and 5xx.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    /// Rejected request or unusable response; retrying will not help.
    #[error("request failed: {0}")]
    Fatal(String),
    #[error("transport failure after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
}

#[async_trait]
pub trait ModelClient: Send + Sync {
    fn name(&self) -> &str;

    async fn complete(&self, req: &ModelRequest) -> Result<Completion, ClientError>;
}

/// Calls `client` until it succeeds, fails permanently, or the attempt
/// budget runs out. Returns the completion and the number of attempts.
pub async fn query_with_retry(
    client: &dyn ModelClient,
    req: &ModelRequest,
    policy: &RetryPolicy,
) -> Result<(Completion, u32), ClientError> {
    let max = policy.max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match client.complete(req).await {
            Ok(c) => return Ok((c, attempt)),
            Err(ClientError::Transient(msg)) => {
                if attempt >= max {
                    return Err(ClientError::Exhausted {
                        attempts: attempt,
                        last: msg,
                    });
                }
                log::warn!("{}: attempt {attempt} failed: {msg}", req.id);
                tokio::time::sleep(Duration::from_millis(policy.delay_ms(attempt))).await;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Chat-completions client for any OpenAI-compatible endpoint.
pub struct HttpClient {
    config: ModelConfig,
    api_key: String,
    http: reqwest::Client,
}

impl HttpClient {
    /// Reads the credential from the environment.
    pub fn from_env(config: ModelConfig) -> Result<Self, ClientError> {
        let api_key = std::env::var(API_KEY_VAR)
            .map_err(|_| ClientError::Auth(format!("{API_KEY_VAR} is not set")))?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Fatal(e.to_string()))?;
        Ok(Self {
            config,
            api_key,
            http,
        })
    }

    fn body(&self, prompt: &str) -> Value {
        let mut body = json!({
            "model": self.config.model_id(),
            "messages": [{"role": "user", "content": prompt}],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(m) = self.config.max_tokens {
            body["max_tokens"] = json!(m);
        }
        body
    }
}

/// Pulls the first choice's message text out of a chat-completions body.
pub fn completion_from_body(body: &Value) -> Result<Completion, ClientError> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ClientError::Fatal("response has no choices[0].message.content".into()))?;
    Ok(Completion {
        text: text.to_string(),
        usage: body.get("usage").cloned(),
    })
}

#[async_trait]
impl ModelClient for HttpClient {
    fn name(&self) -> &str {
        &self.config.name
    }

    async fn complete(&self, req: &ModelRequest) -> Result<Completion, ClientError> {
        let url = format!(
            "{}/chat/completions",
            self.config.endpoint.trim_end_matches('/')
        );
        let resp = self
            .http
            .post(url)
            .bearer_auth(&self.api_key)
            .json(&self.body(&req.prompt))
            .send()
            .await
            .map_err(|e| ClientError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ClientError::Auth(format!("HTTP {status}")));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ClientError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            return Err(ClientError::Fatal(format!("HTTP {status}: {text}")));
        }
        let body: Value = resp
            .json()
            .await
            .map_err(|e| ClientError::Transient(e.to_string()))?;
        completion_from_body(&body)
    }
}

/// What a [`MockClient`] answers.
#[derive(Debug, Clone)]
pub enum MockBehavior {
    /// The same text for every request.
    Fixed(String),
    /// Per-datapoint text keyed by id; unknown ids get an empty answer.
    Script(HashMap<String, String>),
}

/// Offline client. Can be told to fail a number of times per request before
/// answering, or to reject every request as unauthorized.
pub struct MockClient {
    name: String,
    behavior: MockBehavior,
    fail_first: u32,
    auth_failure: bool,
    calls: Mutex<HashMap<String, u32>>,
}

impl MockClient {
    pub fn new(name: impl Into<String>, behavior: MockBehavior) -> Self {
        Self {
            name: name.into(),
            behavior,
            fail_first: 0,
            auth_failure: false,
            calls: Mutex::new(HashMap::new()),
        }
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        Self::new("mock", MockBehavior::Fixed(text.into()))
    }

    pub fn script(answers: HashMap<String, String>) -> Self {
        Self::new("mock", MockBehavior::Script(answers))
    }

    /// Answers every datapoint with its ground-truth rules.
    pub fn echo<'a>(points: impl IntoIterator<Item = &'a crate::benchmark::Datapoint>) -> Self {
        let answers = points
            .into_iter()
            .map(|p| (p.id.clone(), rules_block(p)))
            .collect();
        Self::script(answers)
    }

    pub fn failing_first(mut self, n: u32) -> Self {
        self.fail_first = n;
        self
    }

    pub fn rejecting_auth(mut self) -> Self {
        self.auth_failure = true;
        self
    }

    pub fn calls(&self, id: &str) -> u32 {
        self.calls.lock().unwrap().get(id).copied().unwrap_or(0)
    }
}

/// The ground-truth rules of `p` wrapped in a rule block.
pub fn rules_block(p: &crate::benchmark::Datapoint) -> String {
    let mut s = String::from("<START>\n");
    for r in p.ruleset().sorted_rules() {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s.push_str("<END>\n");
    s
}

#[async_trait]
impl ModelClient for MockClient {
    fn name(&self) -> &str {
        &self.name
    }

    async fn complete(&self, req: &ModelRequest) -> Result<Completion, ClientError> {
        let n = {
            let mut calls = self.calls.lock().unwrap();
            let n = calls.entry(req.id.clone()).or_insert(0);
            *n += 1;
            *n
        };
        if self.auth_failure {
            return Err(ClientError::Auth("mock rejects all credentials".into()));
        }
        if n <= self.fail_first {
            return Err(ClientError::Transient(format!("injected failure {n}")));
        }
        let text = match &self.behavior {
            MockBehavior::Fixed(t) => t.clone(),
            MockBehavior::Script(m) => m.get(&req.id).cloned().unwrap_or_default(),
        };
        Ok(Completion::text(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> RetryPolicy {
        RetryPolicy {
            max_attempts: 4,
            base_delay_ms: 1,
            max_delay_ms: 2,
        }
    }

    fn req() -> ModelRequest {
        ModelRequest {
            id: "x".into(),
            prompt: "p".into(),
        }
    }

    #[tokio::test]
    async fn retries_transient_failures() {
        let c = MockClient::fixed("ok").failing_first(2);
        let (out, attempts) = query_with_retry(&c, &req(), &fast()).await.unwrap();
        assert_eq!(out.text, "ok");
        assert_eq!(attempts, 3);
    }

    #[tokio::test]
    async fn gives_up_after_budget() {
        let c = MockClient::fixed("ok").failing_first(10);
        let err = query_with_retry(&c, &req(), &fast()).await.unwrap_err();
        assert!(matches!(err, ClientError::Exhausted { attempts: 4, .. }));
        assert_eq!(c.calls("x"), 4);
    }

    #[tokio::test]
    async fn auth_is_not_retried() {
        let c = MockClient::fixed("ok").rejecting_auth();
        let err = query_with_retry(&c, &req(), &fast()).await.unwrap_err();
        assert!(matches!(err, ClientError::Auth(_)));
        assert_eq!(c.calls("x"), 1);
    }

    #[test]
    fn chat_body_parsing() {
        let body = json!({
            "choices": [{"message": {"role": "assistant", "content": "<START>\n<END>"}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 3}
        });
        let c = completion_from_body(&body).unwrap();
        assert_eq!(c.text, "<START>\n<END>");
        assert_eq!(c.usage.unwrap()["prompt_tokens"], 10);
        assert!(completion_from_body(&json!({"choices": []})).is_err());
    }
}
