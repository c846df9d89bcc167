//! Poster curation: duplicate removal, scorer and aesthetic gates, text-region
//! masks and region weight maps.
//!
//! Stages run in a fixed order over a batch of [`PosterRecord`]s:
//! content hash dedup, binary scorer gate, perceptual-hash dedup, HPS gate.
//! Each stage only looks at records that are still [`Status::Pending`], so a
//! rejection is final.

mod dedup;
mod hash;
mod mask;
mod score;
mod weight_map;

pub use dedup::{exact_dedup, near_dedup};
pub use hash::{content_hash, dhash, hamming_distance, ContentHash, PerceptualHash};
pub use mask::{classify_mask, parse_text_regions, Box2d, SizeClass, TextRegionMask, NORMALIZED_EXTENT};
pub use score::{binary_gate, hps_filter, score_binary, score_options, BinaryLogits, ScoreError};
pub use weight_map::{RegionWeight, WeightMap};

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    /// Minimum binary scorer output for a poster to be kept.
    pub binary_threshold: f64,
    /// Posters with an HPS score strictly below this are dropped.
    pub hps_threshold: f64,
    /// Maximum perceptual-hash Hamming distance treated as a near duplicate.
    pub hamming_threshold: u32,
    /// Area fraction from which a text region counts as major.
    pub major_fraction_threshold: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            binary_threshold: 0.98,
            hps_threshold: 0.25,
            hamming_threshold: 8,
            major_fraction_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Io,
    DuplicateExact,
    MissingLogits,
    LowBinaryScore,
    DuplicateNear,
    MissingScore,
    LowHps,
    MaskMissing,
    MaskParse,
    ReplayMiss,
    ClientError,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Io => "io",
            RejectReason::DuplicateExact => "duplicate_exact",
            RejectReason::MissingLogits => "missing_logits",
            RejectReason::LowBinaryScore => "low_binary_score",
            RejectReason::DuplicateNear => "duplicate_near",
            RejectReason::MissingScore => "missing_score",
            RejectReason::LowHps => "low_hps",
            RejectReason::MaskMissing => "mask_missing",
            RejectReason::MaskParse => "mask_parse",
            RejectReason::ReplayMiss => "replay_miss",
            RejectReason::ClientError => "client_error",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: RejectReason,
    pub detail: String,
}

impl Rejection {
    pub fn new(reason: RejectReason, detail: impl Into<String>) -> Self {
        Rejection { reason, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Status {
    #[default]
    Pending,
    Rejected(Rejection),
    Accepted,
}

/// One poster as it moves through curation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PosterRecord {
    pub id: String,
    pub content_hash: Option<ContentHash>,
    pub phash: Option<PerceptualHash>,
    pub binary_score: Option<f64>,
    pub hps_score: Option<f64>,
    pub caption: Option<String>,
    pub masks: Vec<TextRegionMask>,
    pub status: Status,
}

impl PosterRecord {
    pub fn new(id: impl Into<String>) -> Self {
        PosterRecord { id: id.into(), ..Default::default() }
    }

    pub fn is_pending(&self) -> bool {
        self.status == Status::Pending
    }

    pub fn reject(&mut self, rejection: Rejection) {
        self.status = Status::Rejected(rejection);
    }
}

/// A rejection recorded by a curation stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub id: String,
    pub rejection: Rejection,
}
