//! Chat-completion-style HTTP client for model endpoints.
//!
//! Requests carry the prompt text plus base64 PNG data URLs for the
//! attached images. Timeouts and 5xx responses are retried with
//! exponential backoff; auth problems and malformed responses are not.
//! A shared in-flight gate caps concurrent requests across episodes.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::protocol::prompt::PromptBundle;
use crate::protocol::ClientError;

/// Endpoint wiring for a model accessed over HTTP.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    /// API root; the client posts to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub temperature: f64,
    /// Cap on concurrent in-flight requests through one client.
    pub max_in_flight: usize,
    /// First backoff delay; doubles per retry.
    pub backoff_base_s: f64,
}

impl Default for ModelEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "https://openrouter.ai/api/v1".to_string(),
            model_id: String::new(),
            api_key_env: "OPENROUTER_API_KEY".to_string(),
            timeout_s: 60.0,
            max_retries: 3,
            temperature: 0.0,
            max_in_flight: 4,
            backoff_base_s: 0.5,
        }
    }
}

struct Gate {
    state: Mutex<usize>,
    cv: Condvar,
    cap: usize,
}

impl Gate {
    fn acquire(&self) {
        let mut in_flight = self.state.lock().unwrap();
        while *in_flight >= self.cap {
            in_flight = self.cv.wait(in_flight).unwrap();
        }
        *in_flight += 1;
    }

    fn release(&self) {
        let mut in_flight = self.state.lock().unwrap();
        *in_flight -= 1;
        self.cv.notify_one();
    }
}

enum SendError {
    Retryable(String),
    Fatal(ClientError),
}

/// Blocking client; cheap to clone and safe to share across episode
/// threads.
#[derive(Clone)]
pub struct ModelClient {
    http: reqwest::blocking::Client,
    cfg: ModelEndpointConfig,
    api_key: String,
    gate: Arc<Gate>,
}

impl ModelClient {
    /// Build a client, reading the API key from the configured environment
    /// variable. Fails before any network traffic when the key is absent.
    pub fn new(cfg: ModelEndpointConfig) -> Result<Self, ClientError> {
        let api_key = std::env::var(&cfg.api_key_env)
            .map_err(|_| ClientError::MissingApiKey(cfg.api_key_env.clone()))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let gate = Arc::new(Gate {
            state: Mutex::new(0),
            cv: Condvar::new(),
            cap: cfg.max_in_flight.max(1),
        });
        Ok(Self {
            http,
            cfg,
            api_key,
            gate,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.cfg.model_id
    }

    /// Request body for a prompt bundle. Exposed so logs can keep the
    /// request with image payloads elided.
    pub fn request_body(&self, bundle: &PromptBundle) -> serde_json::Value {
        let mut content = vec![serde_json::json!({
            "type": "text",
            "text": bundle.text,
        })];
        for img in &bundle.images {
            let encoded = base64::engine::general_purpose::STANDARD.encode(img.to_png_bytes());
            content.push(serde_json::json!({
                "type": "image_url",
                "image_url": { "url": format!("data:image/png;base64,{encoded}") },
            }));
        }
        serde_json::json!({
            "model": self.cfg.model_id,
            "temperature": self.cfg.temperature,
            "messages": [{ "role": "user", "content": content }],
        })
    }

    /// Same body with each image payload replaced by a short placeholder;
    /// this is what episode logs store.
    pub fn loggable_request_body(&self, bundle: &PromptBundle) -> serde_json::Value {
        let mut body = self.request_body(bundle);
        if let Some(content) = body["messages"][0]["content"].as_array_mut() {
            for part in content.iter_mut() {
                if part["type"] == "image_url" {
                    let url = part["image_url"]["url"].as_str().unwrap_or("");
                    part["image_url"]["url"] =
                        serde_json::Value::String(format!("<image elided, {} bytes>", url.len()));
                }
            }
        }
        body
    }

    /// Send the prompt; returns the raw assistant text. Retries timeouts
    /// and 5xx responses up to `max_retries` with exponential backoff.
    pub fn query(&self, bundle: &PromptBundle) -> Result<String, ClientError> {
        let body = self.request_body(bundle);
        let mut attempt = 0u32;
        loop {
            match self.send_once(&body) {
                Ok(text) => return Ok(text),
                Err(SendError::Fatal(e)) => return Err(e),
                Err(SendError::Retryable(last)) => {
                    if attempt >= self.cfg.max_retries {
                        return Err(ClientError::RetriesExhausted {
                            attempts: attempt + 1,
                            last,
                        });
                    }
                    let delay = self.cfg.backoff_base_s * f64::from(1u32 << attempt.min(6));
                    std::thread::sleep(Duration::from_secs_f64(delay));
                    attempt += 1;
                }
            }
        }
    }

    fn send_once(&self, body: &serde_json::Value) -> Result<String, SendError> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        self.gate.acquire();
        let result = self
            .http
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(body)
            .send();
        self.gate.release();
        let response = result.map_err(|e| {
            if e.is_timeout() || e.is_connect() {
                SendError::Retryable(e.to_string())
            } else {
                SendError::Fatal(ClientError::Transport(e.to_string()))
            }
        })?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| SendError::Retryable(e.to_string()))?;
        if status.is_server_error() {
            return Err(SendError::Retryable(format!("status {status}")));
        }
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(SendError::Fatal(ClientError::Auth(status.as_u16())));
        }
        if !status.is_success() {
            return Err(SendError::Fatal(ClientError::Endpoint {
                status: status.as_u16(),
                body: text,
            }));
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| SendError::Fatal(ClientError::MalformedResponse(e.to_string())))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                SendError::Fatal(ClientError::MalformedResponse(
                    "missing choices[0].message.content".to_string(),
                ))
            })
    }
}
