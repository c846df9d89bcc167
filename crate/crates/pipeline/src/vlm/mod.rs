//! External vision-language model access. Every request is keyed by
//! [`cache_key`]; in replay mode only the cache is consulted, in live mode
//! a cache miss goes to the client and the raw response is stored before
//! anyone parses it.

mod cache;
mod client;
mod templates;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub use cache::{cache_key, ResponseCache};
pub use client::{ClientError, HttpVlmClient, VlmClient, API_KEY_ENV, ENDPOINT_ENV};
pub use templates::TemplateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Replay,
    Live,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VlmSettings {
    pub mode: Mode,
    pub cache_dir: Option<PathBuf>,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for VlmSettings {
    fn default() -> Self {
        Self { mode: Mode::Replay, cache_dir: None, max_retries: 3, backoff_ms: 500, max_backoff_ms: 30_000, timeout_secs: 120 }
    }
}

impl VlmSettings {
    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Live && self.cache_dir.is_none() {
            bail!("live mode needs vlm.cache_dir so responses can be stored before parsing");
        }
        if self.timeout_secs == 0 {
            bail!("vlm.timeout_secs must be positive");
        }
        Ok(())
    }

    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.backoff_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms.min(self.max_backoff_ms))
    }
}

/// An image sent along with a prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub media_type: String,
    pub bytes: Vec<u8>,
    pub sha256: String,
}

impl Attachment {
    pub fn from_bytes(media_type: impl Into<String>, bytes: Vec<u8>) -> Self {
        let sha256 = crate::manifest::sha256_hex(&bytes);
        Self { media_type: media_type.into(), bytes, sha256 }
    }

    pub fn from_path(path: &Path) -> io::Result<Self> {
        let bytes = fs::read(path)?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let media_type = match ext.as_str() {
            "jpg" | "jpeg" => "image/jpeg",
            "webp" => "image/webp",
            "gif" => "image/gif",
            _ => "image/png",
        };
        Ok(Self::from_bytes(media_type, bytes))
    }
}

/// A raw response and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub template: TemplateId,
    pub key: String,
    pub raw: String,
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VlmFailure {
    ReplayMiss { key: String },
    Client { key: String, message: String },
}

impl fmt::Display for VlmFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VlmFailure::ReplayMiss { key } => write!(f, "no captured response for key {key}"),
            VlmFailure::Client { key, message } => write!(f, "request {key} failed: {message}"),
        }
    }
}

pub struct Gateway {
    settings: VlmSettings,
    cache: Option<ResponseCache>,
    client: Option<Box<dyn VlmClient>>,
}

impl Gateway {
    /// Builds the gateway for a run. Live mode reads the endpoint from the
    /// environment.
    pub fn from_settings(settings: &VlmSettings) -> Result<Self> {
        settings.validate()?;
        let client: Option<Box<dyn VlmClient>> = match settings.mode {
            Mode::Replay => None,
            Mode::Live => Some(Box::new(
                HttpVlmClient::from_env(Duration::from_secs(settings.timeout_secs)).map_err(anyhow::Error::msg)?,
            )),
        };
        Ok(Self::with_client(settings.clone(), client))
    }

    pub fn with_client(settings: VlmSettings, client: Option<Box<dyn VlmClient>>) -> Self {
        let cache = settings.cache_dir.clone().map(ResponseCache::new);
        Self { settings, cache, client }
    }

    pub fn mode(&self) -> Mode {
        self.settings.mode
    }

    /// Returns the raw response for the request. Errors are hard failures
    /// (cache I/O, bad template use); a miss or a failed call is a
    /// [`VlmFailure`] the caller records as a rejection.
    pub fn request(
        &self,
        template: TemplateId,
        original_prompt: Option<&str>,
        attachments: &[Attachment],
    ) -> Result<std::result::Result<Exchange, VlmFailure>> {
        let rendered = template.render(original_prompt).map_err(anyhow::Error::msg)?;
        let key = cache_key(template, &rendered, attachments);
        if let Some(cache) = &self.cache {
            let hit = cache.get(&key).with_context(|| format!("reading cached response {key}"))?;
            if let Some(raw) = hit {
                return Ok(Ok(Exchange { template, key, raw, cached: true }));
            }
        }
        let (Mode::Live, Some(client), Some(cache)) = (self.settings.mode, &self.client, &self.cache) else {
            return Ok(Err(VlmFailure::ReplayMiss { key }));
        };
        let mut attempt = 0;
        let raw = loop {
            match client.complete(template, &rendered, attachments) {
                Ok(raw) => break raw,
                Err(ClientError::Transient(_)) if attempt < self.settings.max_retries => {
                    thread::sleep(self.settings.backoff(attempt));
                    attempt += 1;
                }
                Err(e) => {
                    let message = if attempt > 0 { format!("{e} after {} attempts", attempt + 1) } else { e.to_string() };
                    return Ok(Err(VlmFailure::Client { key, message }));
                }
            }
        };
        cache.put(&key, &raw).with_context(|| format!("storing response {key}"))?;
        Ok(Ok(Exchange { template, key, raw, cached: false }))
    }
}

/// Reads `<dir>/<name>` if the directory is configured and the file exists.
pub fn read_sidecar(dir: Option<&Path>, name: &str) -> Result<Option<String>> {
    let Some(dir) = dir else { return Ok(None) };
    let path = dir.join(name);
    match fs::read_to_string(&path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
    }
}
