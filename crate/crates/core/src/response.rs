//! Shared handling for JSON responses returned by external vision-language models.
//!
//! Each stage owns its own response schema; this module only turns raw text
//! into a JSON object and reports what went wrong in a uniform way.

use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("malformed JSON ({message}) in `{fragment}`")]
    Malformed { message: String, fragment: String },
    #[error("expected a JSON object, got `{0}`")]
    NotAnObject(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("unexpected key `{0}`")]
    UnexpectedKey(String),
    #[error("invalid value for `{key}`: `{fragment}` ({reason})")]
    InvalidValue {
        key: String,
        fragment: String,
        reason: String,
    },
}

impl ResponseError {
    pub(crate) fn invalid(key: &str, value: &Value, reason: impl Into<String>) -> Self {
        ResponseError::InvalidValue {
            key: key.to_string(),
            fragment: value.to_string(),
            reason: reason.into(),
        }
    }
}

const FRAGMENT_LIMIT: usize = 160;

fn clip(text: &str) -> String {
    match text.char_indices().nth(FRAGMENT_LIMIT) {
        Some((cut, _)) => format!("{}…", &text[..cut]),
        None => text.to_string(),
    }
}

/// Removes a single surrounding markdown code fence, if any.
///
/// Models are told not to fence their output but regularly do anyway; the
/// fenced body still has to be the exact JSON object.
pub fn strip_code_fence(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let Some(body) = rest.strip_suffix("```") else {
        return trimmed;
    };
    // drop the info string (`json`) on the opening line
    match body.find('\n') {
        Some(newline) => body[newline + 1..].trim(),
        None => body.trim(),
    }
}

/// Parses `text` into a JSON object.
pub fn parse_object(text: &str) -> Result<Map<String, Value>, ResponseError> {
    let body = strip_code_fence(text);
    let value: Value = serde_json::from_str(body).map_err(|e| ResponseError::Malformed {
        message: e.to_string(),
        fragment: clip(body),
    })?;
    match value {
        Value::Object(map) => Ok(map),
        other => Err(ResponseError::NotAnObject(clip(&other.to_string()))),
    }
}

/// Rejects keys outside `allowed`.
pub fn only_keys(map: &Map<String, Value>, allowed: &[&str]) -> Result<(), ResponseError> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(extra) => Err(ResponseError::UnexpectedKey(extra.clone())),
        None => Ok(()),
    }
}

pub fn required<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value, ResponseError> {
    map.get(key)
        .ok_or_else(|| ResponseError::MissingKey(key.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fences_are_stripped() {
        assert_eq!(strip_code_fence("```json\n{\"a\": 1}\n```"), "{\"a\": 1}");
        assert_eq!(strip_code_fence("  {\"a\": 1} "), "{\"a\": 1}");
        assert_eq!(strip_code_fence("```{\"a\": 1}```"), "{\"a\": 1}");
    }

    #[test]
    fn non_objects_are_rejected() {
        assert!(matches!(parse_object("[1,2]"), Err(ResponseError::NotAnObject(_))));
        assert!(matches!(parse_object("{"), Err(ResponseError::Malformed { .. })));
    }
}
