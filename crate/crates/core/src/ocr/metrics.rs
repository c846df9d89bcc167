use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AlignmentCounts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OcrError {
    #[error("cannot aggregate an empty corpus")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy `C/T`, precision `C/(C+I+S)`, recall `C/(C+D+S)` and their F-score.
///
/// Two empty texts are a perfect (vacuous) match and score 1.0 everywhere.
/// Otherwise a zero denominator yields 0.0, e.g. precision when the OCR text
/// is empty.
pub fn compute_metrics(counts: &AlignmentCounts) -> OcrMetrics {
    if counts.total() == 0 {
        return OcrMetrics { accuracy: 1.0, precision: 1.0, recall: 1.0, f_score: 1.0 };
    }
    let accuracy = ratio(counts.correct, counts.total());
    let precision = ratio(counts.correct, counts.ocr_len());
    let recall = ratio(counts.correct, counts.gt_len());
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    OcrMetrics { accuracy, precision, recall, f_score }
}

/// Unweighted per-sample mean of every metric.
pub fn aggregate_corpus(per_sample: &[OcrMetrics]) -> Result<OcrMetrics, OcrError> {
    if per_sample.is_empty() {
        return Err(OcrError::EmptyCorpus);
    }
    let n = per_sample.len() as f64;
    let mean = |f: fn(&OcrMetrics) -> f64| per_sample.iter().map(f).sum::<f64>() / n;
    Ok(OcrMetrics {
        accuracy: mean(|m| m.accuracy),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f_score: mean(|m| m.f_score),
    })
}
