use serde::{Deserialize, Serialize};

use super::LossError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Prompt,
    Reflection,
    Image,
}

/// One labelled run of token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub tokens: Vec<Vec<f32>>,
}

/// Prompt embedding, jointly encoded reflection and image tokens, concatenated
/// in that order with explicit positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningSequence {
    dim: usize,
    data: Vec<f32>,
    positions: Vec<usize>,
    reflection_start: usize,
    image_start: usize,
}

impl ConditioningSequence {
    /// Builds the sequence from labelled segments, which must be exactly
    /// `[Prompt, Reflection, Image]`.
    pub fn from_segments(segments: &[Segment]) -> Result<Self, LossError> {
        const ORDER: [SegmentKind; 3] = [SegmentKind::Prompt, SegmentKind::Reflection, SegmentKind::Image];
        let kinds: Vec<SegmentKind> = segments.iter().map(|s| s.kind).collect();
        if kinds != ORDER {
            return Err(LossError::SegmentOrder(kinds));
        }

        let dim = segments
            .iter()
            .flat_map(|s| s.tokens.first())
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        let len: usize = segments.iter().map(|s| s.tokens.len()).sum();
        let mut data = Vec::with_capacity(len * dim);
        for segment in segments {
            for token in &segment.tokens {
                if token.len() != dim {
                    return Err(LossError::DimensionMismatch {
                        segment: segment.kind,
                        expected: dim,
                        actual: token.len(),
                    });
                }
                data.extend_from_slice(token);
            }
        }

        let reflection_start = segments[0].tokens.len();
        let image_start = reflection_start + segments[1].tokens.len();
        Ok(ConditioningSequence {
            dim,
            data,
            positions: (0..len).collect(),
            reflection_start,
            image_start,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn token(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    /// Offsets where the reflection and image segments begin.
    pub fn boundaries(&self) -> (usize, usize) {
        (self.reflection_start, self.image_start)
    }

    pub fn segment_of(&self, index: usize) -> SegmentKind {
        if index < self.reflection_start {
            SegmentKind::Prompt
        } else if index < self.image_start {
            SegmentKind::Reflection
        } else {
            SegmentKind::Image
        }
    }
}

/// `[prompt; reflection; image]`.
pub fn assemble_conditioning(
    prompt: Vec<Vec<f32>>,
    reflection: Vec<Vec<f32>>,
    image: Vec<Vec<f32>>,
) -> Result<ConditioningSequence, LossError> {
    ConditioningSequence::from_segments(&[
        Segment { kind: SegmentKind::Prompt, tokens: prompt },
        Segment { kind: SegmentKind::Reflection, tokens: reflection },
        Segment { kind: SegmentKind::Image, tokens: image },
    ])
}
