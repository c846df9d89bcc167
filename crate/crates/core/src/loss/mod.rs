//! Forward-only numeric kernels for the training objectives.
//!
//! Nothing here computes gradients or touches a model: the kernels take
//! predictions, targets and log-probabilities as plain numbers so each
//! objective can be evaluated and property-tested on its own.

mod conditioning;
mod dpo;
mod flow;
mod schedule;
mod tensor;
pub mod tensor_io;

pub use conditioning::{assemble_conditioning, ConditioningSequence, Segment, SegmentKind};
pub use dpo::{dpo_loss, dpo_loss_from_margin, softplus, DpoInputs};
pub use flow::{flow_loss, noised_state, target_velocity, weighted_flow_loss, WeightingMode};
pub use schedule::{CustomSchedule, NoiseSchedule, Schedule};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("weight shape {weight:?} does not broadcast to {target:?}")]
    NotBroadcastable { weight: Vec<usize>, target: Vec<usize> },
    #[error("shape {shape:?} holds {expected} elements but {actual} values were given")]
    ElementCount { shape: Vec<usize>, expected: usize, actual: usize },
    #[error("negative weight {value} at element {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty tensor")]
    Empty,
    #[error("timestep {0} outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("noise schedule does not provide derivatives")]
    MissingDerivatives,
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("token dimension mismatch: expected {expected}, got {actual} in the {segment:?} segment")]
    DimensionMismatch { segment: SegmentKind, expected: usize, actual: usize },
    #[error("conditioning segments must be ordered prompt, reflection, image; got {0:?}")]
    SegmentOrder(Vec<SegmentKind>),
}
