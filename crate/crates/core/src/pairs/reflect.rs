use serde::{Deserialize, Serialize};

use super::{Feedback, PairRejection, PairRejectReason, REFLECTION_SET_SIZE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionPair {
    pub source_index: usize,
    pub source: String,
    pub target: String,
    pub feedback_content: String,
    pub feedback_style: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedReflection {
    pub source_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionSet {
    pub prompt_id: String,
    pub candidates: Vec<String>,
    pub best_index: Option<usize>,
    pub discarded: bool,
    pub pairs: Vec<ReflectionPair>,
    pub dropped: Vec<DroppedReflection>,
}

/// Pairs every non-best candidate with the best one. `feedback(i)` supplies
/// the suggestions for source `i`; an error drops only that pair. Without a
/// best candidate the set is discarded and `feedback` is never called.
pub fn build_reflection_pairs<F>(
    prompt_id: &str,
    candidates: &[String],
    best_index: Option<usize>,
    mut feedback: F,
) -> Result<ReflectionSet, PairRejection>
where
    F: FnMut(usize) -> Result<Feedback, String>,
{
    if candidates.len() != REFLECTION_SET_SIZE {
        return Err(PairRejection::new(
            PairRejectReason::InvalidSet,
            format!("expected {REFLECTION_SET_SIZE} candidates, got {}", candidates.len()),
        ));
    }
    let mut set = ReflectionSet {
        prompt_id: prompt_id.to_string(),
        candidates: candidates.to_vec(),
        best_index,
        discarded: best_index.is_none(),
        pairs: Vec::new(),
        dropped: Vec::new(),
    };
    let Some(best) = best_index else {
        return Ok(set);
    };
    if best >= REFLECTION_SET_SIZE {
        return Err(PairRejection::new(PairRejectReason::InvalidSet, format!("best index {best} out of range")));
    }
    for i in (0..REFLECTION_SET_SIZE).filter(|i| *i != best) {
        match feedback(i) {
            Ok(fb) => set.pairs.push(ReflectionPair {
                source_index: i,
                source: candidates[i].clone(),
                target: candidates[best].clone(),
                feedback_content: fb.content,
                feedback_style: fb.style,
            }),
            Err(reason) => set.dropped.push(DroppedReflection { source_index: i, reason }),
        }
    }
    Ok(set)
}
