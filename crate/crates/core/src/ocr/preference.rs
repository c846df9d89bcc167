//! Parsing of side-by-side preference evaluation responses.
//!
//! The evaluator compares a left and a right image on four categories and
//! answers `"L"`, `"R"` or `"none"` for each, with a free-text explanation.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::response::{parse_object, required, ResponseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    Left,
    Right,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgement {
    pub choice: Choice,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceEvaluation {
    pub aesthetic_value: Judgement,
    pub prompt_alignment: Judgement,
    pub text_accuracy: Judgement,
    pub overall_preference: Judgement,
}

pub const CATEGORIES: [&str; 4] = [
    "aesthetic_value",
    "prompt_alignment",
    "text_accuracy",
    "overall_preference",
];

fn judgement(map: &serde_json::Map<String, Value>, key: &str) -> Result<Judgement, ResponseError> {
    let value = required(map, key)?;
    let choice = match value.as_str() {
        Some("L") => Choice::Left,
        Some("R") => Choice::Right,
        Some("none") => Choice::Neither,
        _ => return Err(ResponseError::invalid(key, value, "expected \"L\", \"R\" or \"none\"")),
    };
    let explanation_key = format!("{key}_explanation");
    let explanation = required(map, &explanation_key)?;
    let explanation = explanation
        .as_str()
        .ok_or_else(|| ResponseError::invalid(&explanation_key, explanation, "expected a string"))?;
    Ok(Judgement { choice, explanation: explanation.to_string() })
}

pub fn parse_preference_evaluation(response: &str) -> Result<PreferenceEvaluation, ResponseError> {
    let map = parse_object(response)?;
    Ok(PreferenceEvaluation {
        aesthetic_value: judgement(&map, CATEGORIES[0])?,
        prompt_alignment: judgement(&map, CATEGORIES[1])?,
        text_accuracy: judgement(&map, CATEGORIES[2])?,
        overall_preference: judgement(&map, CATEGORIES[3])?,
    })
}

/// Win/lose/tie tallies for one category across many comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub left: usize,
    pub right: usize,
    pub neither: usize,
}

impl Tally {
    pub fn record(&mut self, choice: Choice) {
        match choice {
            Choice::Left => self.left += 1,
            Choice::Right => self.right += 1,
            Choice::Neither => self.neither += 1,
        }
    }

    /// Share of comparisons won by the left image.
    pub fn left_rate(&self) -> f64 {
        let n = self.left + self.right + self.neither;
        if n == 0 {
            0.0
        } else {
            self.left as f64 / n as f64
        }
    }
}
