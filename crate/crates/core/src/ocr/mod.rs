//! OCR evaluation: normalization, character alignment and derived metrics.
//!
//! Both texts are normalized, aligned character by character with a
//! minimum-cost edit alignment, and the resulting correct / inserted /
//! deleted / substituted counts drive accuracy, precision, recall and F-score.

mod align;
mod metrics;
mod normalize;
pub mod preference;
mod report;

pub use align::{align_chars, AlignmentCounts};
pub use metrics::{aggregate_corpus, compute_metrics, OcrError, OcrMetrics};
pub use normalize::{is_stripped_punctuation, normalize_text};
pub use report::{evaluate_pair, OcrReport, Percent};
