//! Parsers for the alignment verdict, best-of-six and feedback responses.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Verdict;
use crate::response::{only_keys, parse_object, required, ResponseError};

pub const CONTENT_KEY: &str = "Poster Content Suggestions";
pub const STYLE_KEY: &str = "Aesthetic style optimization suggestions";

fn string_value<'a>(key: &str, value: &'a Value) -> Result<&'a str, ResponseError> {
    value.as_str().ok_or_else(|| ResponseError::invalid(key, value, "expected a string"))
}

/// `{"final_decision": "1"}` is a pass, `"0"` a fail. Nothing else is accepted.
pub fn parse_verdict(response: &str) -> Result<Verdict, ResponseError> {
    let map = parse_object(response)?;
    only_keys(&map, &["final_decision"])?;
    let value = required(&map, "final_decision")?;
    match string_value("final_decision", value)? {
        "1" => Ok(Verdict::Pass),
        "0" => Ok(Verdict::Fail),
        _ => Err(ResponseError::invalid("final_decision", value, "expected \"0\" or \"1\"")),
    }
}

/// `{"best_image": "k"}` with k in 1..=6 gives index k-1; `"none"` gives `None`.
pub fn parse_best_of_six(response: &str) -> Result<Option<usize>, ResponseError> {
    let map = parse_object(response)?;
    only_keys(&map, &["best_image"])?;
    let value = required(&map, "best_image")?;
    match string_value("best_image", value)? {
        "none" => Ok(None),
        s @ ("1" | "2" | "3" | "4" | "5" | "6") => Ok(Some(s.parse::<usize>().unwrap() - 1)),
        _ => Err(ResponseError::invalid("best_image", value, "expected \"1\"..\"6\" or \"none\"")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub content: String,
    pub style: String,
}

/// Both suggestion keys are required, matched case-insensitively, with
/// non-blank string values. Any other key is rejected.
pub fn parse_feedback(response: &str) -> Result<Feedback, ResponseError> {
    let map = parse_object(response)?;
    let mut content = None;
    let mut style = None;
    for (key, value) in &map {
        let slot = if key.eq_ignore_ascii_case(CONTENT_KEY) {
            &mut content
        } else if key.eq_ignore_ascii_case(STYLE_KEY) {
            &mut style
        } else {
            return Err(ResponseError::UnexpectedKey(key.clone()));
        };
        if slot.is_some() {
            return Err(ResponseError::invalid(key, value, "key repeated with different casing"));
        }
        let text = string_value(key, value)?.trim();
        if text.is_empty() {
            return Err(ResponseError::invalid(key, value, "empty suggestion"));
        }
        *slot = Some(text.to_string());
    }
    Ok(Feedback {
        content: content.ok_or_else(|| ResponseError::MissingKey(CONTENT_KEY.into()))?,
        style: style.ok_or_else(|| ResponseError::MissingKey(STYLE_KEY.into()))?,
    })
}
