//! Blocking client for OpenAI-compatible `/chat/completions` endpoints.
//!
//! The credential is read from an environment variable at client
//! construction and only ever placed in the `Authorization` header. It is
//! never logged or serialized.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmEndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub timeout_s: f64,
    /// Name of the environment variable holding the API key.
    pub api_key_env_var: String,
    /// Extra tries after a transport failure, timeout, 429 or 5xx.
    pub network_retries: u32,
    pub max_tokens: Option<u32>,
}

impl Default for LlmEndpointConfig {
    fn default() -> Self {
        LlmEndpointConfig {
            base_url: "https://api.deepseek.com/v1".into(),
            model_name: "deepseek-chat".into(),
            temperature: 0.7,
            timeout_s: 120.0,
            api_key_env_var: "LAURA_API_KEY".into(),
            network_retries: 2,
            max_tokens: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub prompt: u64,
    pub completion: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request_messages: Vec<ChatMessage>,
    pub response_text: String,
    pub latency_s: f64,
    pub token_counts: Option<TokenCounts>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChatError {
    #[error("environment variable {var} holding the API key is not set")]
    MissingCredential { var: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out after {0} s")]
    Timeout(f64),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response body: {0}")]
    MalformedResponse(String),
}

impl ChatError {
    fn retryable(&self) -> bool {
        match self {
            ChatError::Transport(_) | ChatError::Timeout(_) => true,
            ChatError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Anything that can answer a list of chat messages.
pub trait ChatBackend {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange, ChatError>;
}

const BODY_EXCERPT: usize = 500;

fn excerpt(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).chars().take(BODY_EXCERPT).collect()
}

pub struct ChatClient {
    config: LlmEndpointConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient")
            .field("config", &self.config)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl ChatClient {
    pub fn new(config: LlmEndpointConfig) -> Result<Self, ChatError> {
        let api_key = std::env::var(&config.api_key_env_var).map_err(|_| ChatError::MissingCredential {
            var: config.api_key_env_var.clone(),
        })?;
        if !(config.timeout_s.is_finite() && config.timeout_s > 0.0) {
            return Err(ChatError::Transport(format!("invalid timeout {}", config.timeout_s)));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_s))
            .build()
            .map_err(|e| ChatError::Transport(e.to_string()))?;
        Ok(ChatClient { config, api_key, http })
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.config
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn request_body(&self, messages: &[ChatMessage]) -> Value {
        let mut body = json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        if let Some(max) = self.config.max_tokens {
            body["max_tokens"] = json!(max);
        }
        body
    }

    fn send_once(&self, body: &Value) -> Result<(String, Option<TokenCounts>), ChatError> {
        let response = self
            .http
            .post(self.endpoint())
            .bearer_auth(&self.api_key)
            .json(body)
            .send()
            .map_err(|e| self.classify(e))?;
        let status = response.status();
        let bytes = response.bytes().map_err(|e| self.classify(e))?;
        if !status.is_success() {
            return Err(ChatError::Status {
                status: status.as_u16(),
                body: excerpt(&bytes),
            });
        }
        parse_completion(&bytes)
    }

    fn classify(&self, e: reqwest::Error) -> ChatError {
        if e.is_timeout() {
            ChatError::Timeout(self.config.timeout_s)
        } else {
            // reqwest error text carries the URL but never headers
            ChatError::Transport(e.to_string())
        }
    }
}

/// Pulls `choices[0].message.content` and token usage out of a response.
pub fn parse_completion(bytes: &[u8]) -> Result<(String, Option<TokenCounts>), ChatError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| ChatError::MalformedResponse(format!("{e}: {}", excerpt(bytes))))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| ChatError::MalformedResponse(format!("missing choices[0].message.content: {}", excerpt(bytes))))?;
    let tokens = value.get("usage").and_then(|u| {
        Some(TokenCounts {
            prompt: u.get("prompt_tokens")?.as_u64()?,
            completion: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok((content.to_string(), tokens))
}

impl ChatBackend for ChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatExchange, ChatError> {
        let body = self.request_body(messages);
        let started = Instant::now();
        let mut tries = 0;
        loop {
            log::debug!("POST {} model={} try={}", self.endpoint(), self.config.model_name, tries + 1);
            match self.send_once(&body) {
                Ok((response_text, token_counts)) => {
                    return Ok(ChatExchange {
                        request_messages: messages.to_vec(),
                        response_text,
                        latency_s: started.elapsed().as_secs_f64(),
                        token_counts,
                    })
                }
                Err(e) if e.retryable() && tries < self.config.network_retries => {
                    let base = 0.25 * 2f64.powi(tries as i32);
                    let wait = base * rand::rng().random_range(0.5..1.5);
                    log::warn!("chat request failed ({e}); retrying in {wait:.2} s");
                    std::thread::sleep(Duration::from_secs_f64(wait));
                    tries += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// One request against `config`'s endpoint.
pub fn chat_complete(config: &LlmEndpointConfig, messages: &[ChatMessage]) -> Result<ChatExchange, ChatError> {
    ChatClient::new(config.clone())?.complete(messages)
}
