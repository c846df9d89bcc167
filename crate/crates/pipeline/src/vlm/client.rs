use std::time::Duration;

use base64::Engine;
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use super::{Attachment, TemplateId};

pub const ENDPOINT_ENV: &str = "POSTERKIT_VLM_ENDPOINT";
pub const API_KEY_ENV: &str = "POSTERKIT_VLM_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    /// Worth retrying: timeouts, connection failures, 429 and 5xx.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

pub trait VlmClient: Send + Sync {
    fn complete(&self, template: TemplateId, prompt: &str, attachments: &[Attachment]) -> Result<String, ClientError>;
}

/// Posts `{template_id, prompt, images: [{media_type, data}]}` as JSON and
/// accepts either `{"text": "..."}` or a plain-text body as the response.
pub struct HttpVlmClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpVlmClient {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self { agent: config.into(), endpoint: endpoint.into(), api_key }
    }

    pub fn from_env(timeout: Duration) -> Result<Self, String> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| format!("live mode needs {ENDPOINT_ENV} to be set"))?;
        let key = std::env::var(API_KEY_ENV).ok().filter(|s| !s.is_empty());
        Ok(Self::new(endpoint, key, timeout))
    }
}

#[derive(Deserialize)]
struct TextBody {
    text: String,
}

impl VlmClient for HttpVlmClient {
    fn complete(&self, template: TemplateId, prompt: &str, attachments: &[Attachment]) -> Result<String, ClientError> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let images: Vec<_> = attachments
            .iter()
            .map(|a| json!({"media_type": a.media_type, "data": b64.encode(&a.bytes)}))
            .collect();
        let body = json!({"template_id": template.as_str(), "prompt": prompt, "images": images});
        let bytes = serde_json::to_vec(&body).map_err(|e| ClientError::Fatal(e.to_string()))?;
        let mut req = self.agent.post(&self.endpoint).header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send(&bytes[..]).map_err(classify)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(classify)?;
        match status {
            200..=299 => {}
            429 | 500..=599 => return Err(ClientError::Transient(format!("HTTP {status}"))),
            _ => return Err(ClientError::Fatal(format!("HTTP {status}: {}", truncate(&text)))),
        }
        match serde_json::from_str::<TextBody>(&text) {
            Ok(body) => Ok(body.text),
            Err(_) => Ok(text),
        }
    }
}

fn classify(e: ureq::Error) -> ClientError {
    match e {
        ureq::Error::StatusCode(429) => ClientError::Transient("HTTP 429".into()),
        ureq::Error::StatusCode(s) if s >= 500 => ClientError::Transient(format!("HTTP {s}")),
        ureq::Error::StatusCode(s) => ClientError::Fatal(format!("HTTP {s}")),
        ureq::Error::Io(e) => ClientError::Transient(e.to_string()),
        ureq::Error::Timeout(t) => ClientError::Transient(format!("timeout ({t})")),
        ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => ClientError::Transient(e.to_string()),
        other => ClientError::Fatal(other.to_string()),
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
