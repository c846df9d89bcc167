//! Synthetic text-rendering samples: content, fonts, grid layout,
//! compositing and prompt synthesis.

mod background;
mod config;
mod content;
mod font;
mod layout;
mod prompt;
mod render;
mod spec;

use std::path::Path;

use image::RgbImage;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use background::{procedural_background, BackgroundSource};
pub use config::{Canvas, GenerationConfig, GridCell, PixelBox};
pub use content::{generate_text_content, ContentKind, Grammar, TextContent, MAX_CONTENT_CHARS};
pub use font::{select_font, FontClass, FontFace, FontLibrary};
pub use layout::{
    fit_font_size, measure_block, oriented_dims, plan_layout, DropReason, DroppedInstance, LayoutPlan,
    PlacedInstance, TextBlock,
};
pub use prompt::{parse_prompt, synthesize_prompt, PromptClause, PromptParseError, NO_TEXT_PROMPT};
pub use render::{fit_background, render_instance_mask, render_sample, CoverageMask};
pub use spec::{Alignment, ColorCategory, Orientation, TextInstanceSpec};

use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("vocabulary category {0} is empty or missing")]
    EmptyVocabulary(String),
    #[error("no font covers the glyphs of {0:?}")]
    NoCoveringFont(String),
    #[error("background is {width}x{height}, smaller than the {canvas_width}x{canvas_height} canvas")]
    BackgroundTooSmall { width: u32, height: u32, canvas_width: u32, canvas_height: u32 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("image error: {0}")]
    Image(String),
}

impl ForgeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

/// Smallest font size the forge will plan, in pixels.
pub const MIN_FONT_PX: f32 = 8.0;

pub(crate) fn pick_weighted(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Layout and prompt for one sample, before any pixels are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub index: u64,
    pub seed: u64,
    pub background_id: String,
    pub requested_instances: usize,
    pub instances: Vec<PlacedInstance>,
    pub dropped: Vec<DroppedInstance>,
    pub prompt: String,
}

#[derive(Debug, Clone)]
pub struct RenderedSample {
    pub plan: SamplePlan,
    pub image: RgbImage,
}

/// Sample generator bound to a config and its assets.
#[derive(Debug, Clone)]
pub struct Forge {
    config: GenerationConfig,
    grammar: Grammar,
    fonts: FontLibrary,
    backgrounds: BackgroundSource,
}

impl Forge {
    pub fn new(
        config: GenerationConfig,
        grammar: Grammar,
        fonts: FontLibrary,
        backgrounds: BackgroundSource,
    ) -> Result<Self, ForgeError> {
        config.validate()?;
        if !fonts.faces().any(FontFace::supports_lowercase) {
            return Err(ForgeError::Config("no font in the library supports lowercase letters".into()));
        }
        if backgrounds.is_empty() {
            return Err(ForgeError::Config("no backgrounds available".into()));
        }
        Ok(Self { config, grammar, fonts, backgrounds })
    }

    /// Builtin grammar, builtin fonts and procedural backgrounds.
    pub fn builtin(config: GenerationConfig) -> Result<Self, ForgeError> {
        Self::new(config, Grammar::builtin(), FontLibrary::builtin(), BackgroundSource::Procedural { count: 64 })
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.config
    }

    pub fn fonts(&self) -> &FontLibrary {
        &self.fonts
    }

    /// Draws the instance specs for one sample. Instances whose content no
    /// font covers are returned as drops.
    fn draw_specs(&self, rng: &mut impl Rng) -> (Vec<TextInstanceSpec>, Vec<DroppedInstance>) {
        let cfg = &self.config;
        let canvas = cfg.canvas();
        let count = pick_weighted(rng, &cfg.instance_count_weights) + 1;
        let mut cells = GridCell::ALL.to_vec();
        let mut specs = Vec::with_capacity(count);
        let mut dropped = Vec::new();
        for k in 0..count {
            let content = generate_text_content(rng, &self.grammar, cfg).text;
            let cell = cells.swap_remove(rng.random_range(0..9 - k));
            let mut orientation = Orientation::ALL[pick_weighted(rng, &cfg.orientation_weights)];
            if orientation.is_vertical() && content.chars().count() > cfg.max_vertical_chars {
                orientation = Orientation::Horizontal;
            }
            let alignment = Alignment::ALL[rng.random_range(0..3)];
            let rotation_deg = if orientation == Orientation::Horizontal && rng.random_bool(cfg.rotation_probability) {
                let [lo, hi] = cfg.rotation_range_deg;
                if lo < hi {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            } else {
                0.0
            };
            let color_category = ColorCategory::ALL[rng.random_range(0..ColorCategory::ALL.len())];
            let rgb = color_category.jittered(rng, cfg.color_jitter);
            let short_side = canvas.width.min(canvas.height) as f64;
            let [fmin, fmax] = cfg.font_size_range;
            let size = if fmin < fmax { rng.random_range(fmin..=fmax) } else { fmin };
            let px = ((size * short_side) as f32).max(MIN_FONT_PX);
            let face = match select_font(rng, &self.fonts, &content, cfg) {
                Ok(face) => face,
                Err(_) => {
                    dropped.push(DroppedInstance { content, reason: DropReason::NoCoveringFont });
                    continue;
                }
            };
            let mut spec = TextInstanceSpec {
                content,
                font_id: face.id().to_string(),
                font_class: face.class(),
                color_category,
                rgb,
                orientation,
                alignment,
                rotation_deg,
                grid_cell: cell,
                font_size_px: px,
            };
            spec.font_size_px = fit_font_size(face, &spec, px, MIN_FONT_PX, &canvas, cfg);
            specs.push(spec);
        }
        (specs, dropped)
    }

    pub fn plan(&self, index: u64) -> SamplePlan {
        let seed = derive_seed(self.config.master_seed, index);
        let mut rng = rng_for(seed);
        let background_id = self.backgrounds.id(rng.random_range(0..self.backgrounds.len()));
        let (specs, mut dropped) = self.draw_specs(&mut rng);
        let requested_instances = specs.len() + dropped.len();
        let layout = plan_layout(&self.config.canvas(), &specs, &self.fonts, &mut rng, &self.config);
        dropped.extend(layout.dropped);
        let prompt = synthesize_prompt(&layout.placed, &self.config, &mut rng);
        SamplePlan {
            index,
            seed,
            background_id,
            requested_instances,
            instances: layout.placed,
            dropped,
            prompt,
        }
    }

    pub fn render(&self, plan: &SamplePlan) -> Result<RgbImage, ForgeError> {
        let canvas = self.config.canvas();
        let background = self.backgrounds.load(&plan.background_id, &canvas)?;
        render_sample(&background, &plan.instances, &self.fonts, &self.config)
    }

    pub fn generate(&self, index: u64) -> Result<RenderedSample, ForgeError> {
        let plan = self.plan(index);
        let image = self.render(&plan)?;
        Ok(RenderedSample { plan, image })
    }
}
