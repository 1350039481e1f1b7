//! Chat-completions style client contract and its HTTP implementation.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::AgentRole;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// One agent call. `payload` is the structured input already rendered into
/// `messages`; transports send only the messages.
#[derive(Debug, Clone)]
pub struct AgentRequest {
    pub role: AgentRole,
    pub messages: Vec<ChatMessage>,
    pub payload: Value,
    pub images: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("api key variable {0} is not set")]
    MissingKey(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &AgentRequest) -> Result<String, ClientError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmClientConfig {
    #[serde(default)]
    pub endpoint_url: Option<String>,
    #[serde(default = "default_model")]
    pub model_name: String,
    #[serde(default = "default_key_var")]
    pub api_key_env_var: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub temperature: f64,
}

fn default_model() -> String {
    "gpt-4o".into()
}
fn default_key_var() -> String {
    "OPENAI_API_KEY".into()
}
fn default_timeout() -> u64 {
    60
}
fn default_retries() -> u32 {
    2
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        Self {
            endpoint_url: None,
            model_name: default_model(),
            api_key_env_var: default_key_var(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            temperature: 0.0,
        }
    }
}

/// Blocking HTTP client for an OpenAI-compatible `/chat/completions` endpoint.
pub struct HttpClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

impl HttpClient {
    /// Returns `Ok(None)` when no endpoint is configured.
    pub fn from_config(cfg: &LlmClientConfig) -> Result<Option<Self>, ClientError> {
        let Some(endpoint) = cfg.endpoint_url.clone() else {
            return Ok(None);
        };
        let api_key = std::env::var(&cfg.api_key_env_var).ok();
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(Some(Self { http, endpoint, model: cfg.model_name.clone(), temperature: cfg.temperature, api_key }))
    }

    pub fn request_body(&self, request: &AgentRequest) -> Value {
        json!({
            "model": self.model,
            "messages": request.messages,
            "temperature": self.temperature,
        })
    }
}

/// Extracts the first message content of a chat-completions response.
pub fn first_message_content(body: &Value) -> Result<String, ClientError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ClientError::Protocol("missing choices[0].message.content".into()))
}

impl LlmClient for HttpClient {
    fn complete(&self, request: &AgentRequest) -> Result<String, ClientError> {
        let mut req = self.http.post(&self.endpoint).json(&self.request_body(request));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ClientError::Transport(format!("HTTP {status}")));
        }
        let body: Value = resp.json().map_err(|e| ClientError::Protocol(e.to_string()))?;
        first_message_content(&body)
    }
}
