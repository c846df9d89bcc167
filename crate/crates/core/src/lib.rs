//! Dataset construction and evaluation kernels for aesthetic poster generation.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`forge`]: synthetic text-render samples (content, fonts, grid layout,
//!   compositing, structured prompts).
//! - [`curation`]: poster filtering (exact/near dedup, binary scorer, HPS gate),
//!   text-region masks and per-pixel weight maps.
//! - [`pairs`]: best-of-n preference pairs and best-of-six reflection pairs.
//! - [`loss`]: forward-only numeric kernels for the training objectives.
//! - [`ocr`]: text normalization, character alignment and OCR metrics.
//!
//! Everything here is deterministic given its inputs; randomness is always
//! threaded through an explicit, seeded generator.

pub mod curation;
pub mod forge;
pub mod loss;
pub mod ocr;
pub mod pairs;
pub mod response;
pub mod seed;
