//! Preference pairs (best-of-n winner against worst-of-n loser, gated on
//! reward gap and an alignment verdict) and reflection pairs (every
//! non-best candidate of a six-image set against the best one).

mod reflect;
mod responses;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use reflect::{build_reflection_pairs, DroppedReflection, ReflectionPair, ReflectionSet};
pub use responses::{parse_best_of_six, parse_feedback, parse_verdict, Feedback, CONTENT_KEY, STYLE_KEY};

pub const DEFAULT_MIN_GAP: f64 = 0.025;
pub const REFLECTION_SET_SIZE: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub image: String,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub prompt_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub prompt_id: String,
    pub winner: String,
    pub loser: String,
    pub winner_index: usize,
    pub loser_index: usize,
    pub reward_gap: f64,
    pub alignment_verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRejectReason {
    InvalidSet,
    Degenerate,
    MissingVerdict,
    GapTooSmall,
    AlignmentFail,
}

impl PairRejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            PairRejectReason::InvalidSet => "invalid_set",
            PairRejectReason::Degenerate => "degenerate",
            PairRejectReason::MissingVerdict => "missing_verdict",
            PairRejectReason::GapTooSmall => "gap_too_small",
            PairRejectReason::AlignmentFail => "alignment_fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}: {detail}", reason.as_str())]
pub struct PairRejection {
    pub reason: PairRejectReason,
    pub detail: String,
}

impl PairRejection {
    fn new(reason: PairRejectReason, detail: impl Into<String>) -> Self {
        Self { reason, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExtremesError {
    #[error("need at least two rewards")]
    TooFew,
    #[error("reward {0} is not finite")]
    NonFinite(usize),
    #[error("all rewards are equal")]
    Degenerate,
}

/// Index of the highest and of the lowest reward; ties go to the smallest
/// index.
pub fn select_extremes(rewards: &[f64]) -> Result<(usize, usize), ExtremesError> {
    if rewards.len() < 2 {
        return Err(ExtremesError::TooFew);
    }
    if let Some(i) = rewards.iter().position(|r| !r.is_finite()) {
        return Err(ExtremesError::NonFinite(i));
    }
    let (mut hi, mut lo) = (0, 0);
    for (i, r) in rewards.iter().enumerate().skip(1) {
        if *r > rewards[hi] {
            hi = i;
        }
        if *r < rewards[lo] {
            lo = i;
        }
    }
    if rewards[hi] == rewards[lo] {
        return Err(ExtremesError::Degenerate);
    }
    Ok((hi, lo))
}

/// Winner and loser of a set, or why the set cannot produce a pair.
pub fn set_extremes(set: &CandidateSet) -> Result<(usize, usize), PairRejection> {
    let rewards: Vec<f64> = set.candidates.iter().map(|c| c.reward).collect();
    select_extremes(&rewards).map_err(|e| match e {
        ExtremesError::Degenerate => PairRejection::new(PairRejectReason::Degenerate, e.to_string()),
        _ => PairRejection::new(PairRejectReason::InvalidSet, e.to_string()),
    })
}

/// Emits a pair when the set has distinct extremes, a verdict is present,
/// the reward gap strictly exceeds `min_gap`, and the winner passed the
/// alignment check. Checks run in that order; the first failure is reported.
pub fn build_preference_pair(
    set: &CandidateSet,
    verdict: Option<Verdict>,
    min_gap: f64,
) -> Result<PreferencePair, PairRejection> {
    let (w, l) = set_extremes(set)?;
    let Some(verdict) = verdict else {
        return Err(PairRejection::new(PairRejectReason::MissingVerdict, "no verdict for winner"));
    };
    let gap = set.candidates[w].reward - set.candidates[l].reward;
    if gap <= min_gap {
        return Err(PairRejection::new(PairRejectReason::GapTooSmall, format!("gap {gap}")));
    }
    if verdict == Verdict::Fail {
        return Err(PairRejection::new(PairRejectReason::AlignmentFail, "winner failed alignment"));
    }
    Ok(PreferencePair {
        prompt_id: set.prompt_id.clone(),
        winner: set.candidates[w].image.clone(),
        loser: set.candidates[l].image.clone(),
        winner_index: w,
        loser_index: l,
        reward_gap: gap,
        alignment_verdict: verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(rewards: &[f64]) -> CandidateSet {
        CandidateSet {
            prompt_id: "p".into(),
            prompt: None,
            candidates: rewards
                .iter()
                .enumerate()
                .map(|(i, r)| Candidate { image: format!("img{i}.png"), reward: *r })
                .collect(),
        }
    }

    #[test]
    fn extremes_examples() {
        assert_eq!(select_extremes(&[0.30, 0.26, 0.33]), Ok((2, 1)));
        assert_eq!(select_extremes(&[0.5, 0.5, 0.4]), Ok((0, 2)));
        assert_eq!(select_extremes(&[0.3, 0.3]), Err(ExtremesError::Degenerate));
        assert_eq!(select_extremes(&[0.3]), Err(ExtremesError::TooFew));
        assert_eq!(select_extremes(&[0.3, f64::NAN]), Err(ExtremesError::NonFinite(1)));
    }

    #[test]
    fn gate_examples() {
        let pair = build_preference_pair(&set(&[0.30, 0.37]), Some(Verdict::Pass), DEFAULT_MIN_GAP).unwrap();
        assert_eq!((pair.winner_index, pair.loser_index), (1, 0));
        assert!((pair.reward_gap - 0.07).abs() < 1e-12);
        let err = build_preference_pair(&set(&[0.30, 0.31]), Some(Verdict::Pass), DEFAULT_MIN_GAP).unwrap_err();
        assert_eq!(err.reason, PairRejectReason::GapTooSmall);
        let err = build_preference_pair(&set(&[0.30, 0.40]), Some(Verdict::Fail), DEFAULT_MIN_GAP).unwrap_err();
        assert_eq!(err.reason, PairRejectReason::AlignmentFail);
        let err = build_preference_pair(&set(&[0.30, 0.40]), None, DEFAULT_MIN_GAP).unwrap_err();
        assert_eq!(err.reason, PairRejectReason::MissingVerdict);
        let err = build_preference_pair(&set(&[0.4, 0.4]), None, DEFAULT_MIN_GAP).unwrap_err();
        assert_eq!(err.reason, PairRejectReason::Degenerate);
    }

    #[test]
    fn gap_equal_to_threshold_is_rejected() {
        let err = build_preference_pair(&set(&[0.0, 0.5]), Some(Verdict::Pass), 0.5).unwrap_err();
        assert_eq!(err.reason, PairRejectReason::GapTooSmall);
    }

    proptest! {
        #[test]
        fn extremes_match_scan(rewards in prop::collection::vec(-1.0f64..1.0, 2..12)) {
            let got = select_extremes(&rewards);
            let max = rewards.iter().cloned().fold(f64::MIN, f64::max);
            let min = rewards.iter().cloned().fold(f64::MAX, f64::min);
            if max == min {
                prop_assert_eq!(got, Err(ExtremesError::Degenerate));
            } else {
                let hi = rewards.iter().position(|r| *r == max).unwrap();
                let lo = rewards.iter().position(|r| *r == min).unwrap();
                prop_assert_eq!(got, Ok((hi, lo)));
            }
        }

        #[test]
        fn extremes_invariant_under_monotone_maps(rewards in prop::collection::vec(-3.0f64..3.0, 2..10)) {
            let mapped: Vec<f64> = rewards.iter().map(|r| 2.0 * r + 5.0).collect();
            let cubed: Vec<f64> = rewards.iter().map(|r| r.powi(3) + r).collect();
            prop_assert_eq!(select_extremes(&rewards), select_extremes(&mapped));
            prop_assert_eq!(select_extremes(&rewards), select_extremes(&cubed));
        }
    }
}
