use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{RejectReason, Rejection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("logit for option {option} is not finite ({value})")]
    NonFiniteLogit { option: String, value: f64 },
    #[error("no weight for option {0}")]
    MissingWeight(String),
    #[error("no options to score")]
    NoOptions,
}

/// Scorer logits for the two options of the binary question.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogits {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

/// Expected option weight under the softmax of the logits,
/// `sum_x softmax(l)_x * w_x`, computed with max subtraction.
pub fn score_options(logits: &BTreeMap<String, f64>, weights: &BTreeMap<String, f64>) -> Result<f64, ScoreError> {
    if logits.is_empty() {
        return Err(ScoreError::NoOptions);
    }
    if let Some((option, &value)) = logits.iter().find(|(_, v)| !v.is_finite()) {
        return Err(ScoreError::NonFiniteLogit { option: option.clone(), value });
    }
    let max = logits.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut norm = 0.0;
    let mut weighted = 0.0;
    for (option, &logit) in logits {
        let w = *weights.get(option).ok_or_else(|| ScoreError::MissingWeight(option.clone()))?;
        let e = (logit - max).exp();
        norm += e;
        weighted += e * w;
    }
    Ok(weighted / norm)
}

/// Binary scorer with `w_A = 0`, `w_B = 1`: the softmax probability of `B`.
///
/// Strictly increasing in `l_B - l_A`; equal logits score exactly 0.5.
pub fn score_binary(logits: BinaryLogits) -> Result<f64, ScoreError> {
    for (option, value) in [("A", logits.a), ("B", logits.b)] {
        if !value.is_finite() {
            return Err(ScoreError::NonFiniteLogit { option: option.into(), value });
        }
    }
    let max = logits.a.max(logits.b);
    let ea = (logits.a - max).exp();
    let eb = (logits.b - max).exp();
    Ok(eb / (ea + eb))
}

/// Scores a poster and applies the keep threshold (inclusive).
pub fn binary_gate(logits: Option<BinaryLogits>, threshold: f64) -> Result<f64, Rejection> {
    let logits = logits.ok_or_else(|| Rejection::new(RejectReason::MissingLogits, "no scorer logits"))?;
    let score = score_binary(logits).map_err(|e| Rejection::new(RejectReason::MissingLogits, e.to_string()))?;
    if score < threshold {
        return Err(Rejection::new(
            RejectReason::LowBinaryScore,
            format!("score {score:.6} below {threshold}"),
        ));
    }
    Ok(score)
}

/// Drops posters whose HPS score is strictly below `threshold`.
pub fn hps_filter(hps_score: Option<f64>, threshold: f64) -> Result<(), Rejection> {
    match hps_score {
        None => Err(Rejection::new(RejectReason::MissingScore, "no HPS score")),
        Some(s) if !s.is_finite() => Err(Rejection::new(RejectReason::MissingScore, format!("HPS score {s}"))),
        Some(s) if s < threshold => Err(Rejection::new(
            RejectReason::LowHps,
            format!("HPS {s} below {threshold}"),
        )),
        Some(_) => Ok(()),
    }
}
