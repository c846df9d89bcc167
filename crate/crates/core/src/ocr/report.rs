use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{align_chars, compute_metrics, normalize_text, AlignmentCounts, OcrMetrics};

/// A ratio rendered as a percentage string with two decimals, e.g. `"92.31%"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percent(pub f64);

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}%", self.0 * 100.0)
    }
}

impl FromStr for Percent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let number = s
            .trim()
            .strip_suffix('%')
            .ok_or_else(|| format!("`{s}` is not a percentage"))?;
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a percentage"))?;
        Ok(Percent(value / 100.0))
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-sample OCR evaluation record in the evaluator's JSON output shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrReport {
    #[serde(rename = "GT_text")]
    pub gt_text: String,
    #[serde(rename = "OCR_text")]
    pub ocr_text: String,
    #[serde(rename = "total_GT_chars")]
    pub total_gt_chars: usize,
    pub correct_chars: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub accuracy: Percent,
    pub precision: Percent,
    pub recall: Percent,
    pub f_score: Percent,
}

impl OcrReport {
    pub fn new(gt_text: String, ocr_text: String, counts: &AlignmentCounts, metrics: &OcrMetrics) -> Self {
        OcrReport {
            gt_text,
            ocr_text,
            total_gt_chars: counts.gt_len(),
            correct_chars: counts.correct,
            insertions: counts.insertions,
            deletions: counts.deletions,
            substitutions: counts.substitutions,
            accuracy: Percent(metrics.accuracy),
            precision: Percent(metrics.precision),
            recall: Percent(metrics.recall),
            f_score: Percent(metrics.f_score),
        }
    }

    pub fn counts(&self) -> AlignmentCounts {
        AlignmentCounts {
            correct: self.correct_chars,
            insertions: self.insertions,
            deletions: self.deletions,
            substitutions: self.substitutions,
        }
    }
}

/// Normalizes both texts, aligns them and computes metrics.
pub fn evaluate_pair(raw_gt: &str, raw_ocr: &str) -> (OcrReport, OcrMetrics) {
    let gt = normalize_text(raw_gt);
    let ocr = normalize_text(raw_ocr);
    let counts = align_chars(&gt, &ocr);
    let metrics = compute_metrics(&counts);
    (OcrReport::new(gt, ocr, &counts, &metrics), metrics)
}
