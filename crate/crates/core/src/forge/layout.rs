//! Text block measurement and grid placement with collision retries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Canvas, FontFace, FontLibrary, GenerationConfig, GridCell, Orientation, PixelBox, TextInstanceSpec};

/// Unrotated text block: the lines to draw and the pixel size they occupy.
#[derive(Debug, Clone, PartialEq)]
pub struct TextBlock {
    pub lines: Vec<String>,
    pub width: u32,
    pub height: u32,
    pub margin: f32,
    pub line_height: f32,
    pub content_width: f32,
}

pub(crate) fn margin_for(px: f32) -> f32 {
    (px * 0.08).ceil().max(1.0)
}

fn wrap_words(face: &FontFace, content: &str, px: f32, wrap_width: f32) -> Vec<String> {
    if face.line_width(content, px) <= wrap_width {
        return vec![content.to_string()];
    }
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in content.split(' ').filter(|w| !w.is_empty()) {
        if current.is_empty() {
            current.push_str(word);
            continue;
        }
        let candidate = format!("{current} {word}");
        if face.line_width(&candidate, px) <= wrap_width {
            current = candidate;
        } else {
            lines.push(std::mem::replace(&mut current, word.to_string()));
        }
    }
    if !current.is_empty() || lines.is_empty() {
        lines.push(current);
    }
    lines
}

/// Breaks `content` into lines and measures the result. Horizontal text wraps
/// at `wrap_width`; `None` means it needs more than `max_lines` lines.
/// Stacked text puts one character on each line.
pub fn measure_block(
    face: &FontFace,
    content: &str,
    orientation: Orientation,
    px: f32,
    wrap_width: f32,
    max_lines: u32,
) -> Option<TextBlock> {
    let lines: Vec<String> = match orientation {
        Orientation::Horizontal => wrap_words(face, content, px, wrap_width),
        Orientation::VerticalRotated => vec![content.to_string()],
        Orientation::VerticalStacked => content.chars().map(String::from).collect(),
    };
    if orientation == Orientation::Horizontal && lines.len() > max_lines as usize {
        return None;
    }
    let margin = margin_for(px);
    let line_height = face.line_height(px);
    let content_width = lines.iter().map(|l| face.line_width(l, px)).fold(0.0, f32::max);
    let width = (content_width + face.overhang(px)).ceil() + 2.0 * margin;
    let height = (lines.len() as f32 * line_height).ceil() + 2.0 * margin;
    Some(TextBlock {
        lines,
        width: width as u32,
        height: height as u32,
        margin,
        line_height,
        content_width,
    })
}

/// Size of the axis-aligned box that holds the block once oriented/rotated.
pub fn oriented_dims(block: &TextBlock, orientation: Orientation, rotation_deg: f64) -> (u32, u32) {
    match orientation {
        Orientation::VerticalRotated => (block.height, block.width),
        Orientation::VerticalStacked => (block.width, block.height),
        Orientation::Horizontal if rotation_deg == 0.0 => (block.width, block.height),
        Orientation::Horizontal => {
            let (s, c) = rotation_deg.to_radians().sin_cos();
            let (w, h) = (block.width as f64, block.height as f64);
            let bw = (w * c.abs() + h * s.abs() - 1e-9).ceil();
            let bh = (w * s.abs() + h * c.abs() - 1e-9).ceil();
            (bw as u32, bh as u32)
        }
    }
}

fn wrap_width(canvas: &Canvas, cell: GridCell, config: &GenerationConfig) -> f32 {
    canvas.cell_region(cell).width() as f32 * config.wrap_width_fraction as f32
}

fn oriented_box_for(
    face: &FontFace,
    spec: &TextInstanceSpec,
    px: f32,
    canvas: &Canvas,
    cell: GridCell,
    config: &GenerationConfig,
) -> Option<(TextBlock, u32, u32)> {
    let block = measure_block(
        face,
        &spec.content,
        spec.orientation,
        px,
        wrap_width(canvas, cell, config),
        config.max_lines,
    )?;
    let (w, h) = oriented_dims(&block, spec.orientation, spec.rotation_deg);
    Some((block, w, h))
}

/// Largest size not above `px` (stepping down by 15%) whose box fits the
/// cell, stopping at `min_px`.
pub fn fit_font_size(
    face: &FontFace,
    spec: &TextInstanceSpec,
    px: f32,
    min_px: f32,
    canvas: &Canvas,
    config: &GenerationConfig,
) -> f32 {
    let region = canvas.cell_region(spec.grid_cell);
    let mut size = px;
    while size > min_px {
        if let Some((_, w, h)) = oriented_box_for(face, spec, size, canvas, spec.grid_cell, config) {
            if w <= region.width() && h <= region.height() {
                return size;
            }
        }
        size = (size * 0.85).max(min_px);
    }
    min_px
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedInstance {
    pub spec: TextInstanceSpec,
    pub lines: Vec<String>,
    #[serde(rename = "box")]
    pub bbox: PixelBox,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    NoCoveringFont,
    PlacementExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedInstance {
    pub content: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayoutPlan {
    pub placed: Vec<PlacedInstance>,
    pub dropped: Vec<DroppedInstance>,
}

fn other_cell(rng: &mut impl Rng, current: GridCell) -> GridCell {
    let others: Vec<GridCell> = GridCell::ALL.into_iter().filter(|c| *c != current).collect();
    others[rng.random_range(0..others.len())]
}

/// Places each spec inside its grid cell. A failed attempt (block does not
/// fit the cell, needs too many lines, or comes within the collision padding
/// of an earlier box) moves the instance to another random cell; from
/// `shrink_from_attempt` on the font size also shrinks. Instances that run
/// out of attempts are dropped.
pub fn plan_layout(
    canvas: &Canvas,
    specs: &[TextInstanceSpec],
    fonts: &FontLibrary,
    rng: &mut impl Rng,
    config: &GenerationConfig,
) -> LayoutPlan {
    let mut plan = LayoutPlan::default();
    for spec in specs {
        let Some(face) = fonts.get(&spec.font_id) else {
            plan.dropped.push(DroppedInstance { content: spec.content.clone(), reason: DropReason::NoCoveringFont });
            continue;
        };
        let mut cell = spec.grid_cell;
        let mut px = spec.font_size_px;
        let mut placed = None;
        for attempt in 1..=config.max_placement_attempts {
            if attempt > 1 {
                cell = other_cell(rng, cell);
            }
            if attempt >= config.shrink_from_attempt {
                px *= config.shrink_factor as f32;
            }
            let Some((block, w, h)) = oriented_box_for(face, spec, px, canvas, cell, config) else {
                continue;
            };
            let region = canvas.cell_region(cell);
            if w == 0 || h == 0 || w > region.width() || h > region.height() {
                continue;
            }
            let x0 = region.x0 + rng.random_range(0..=region.width() - w);
            let y0 = region.y0 + rng.random_range(0..=region.height() - h);
            let bbox = PixelBox { x0, y0, x1: x0 + w, y1: y0 + h };
            if plan
                .placed
                .iter()
                .any(|p| bbox.within_padding(&p.bbox, config.collision_padding_px))
            {
                continue;
            }
            let mut final_spec = spec.clone();
            final_spec.grid_cell = cell;
            final_spec.font_size_px = px;
            placed = Some(PlacedInstance { spec: final_spec, lines: block.lines, bbox, attempts: attempt });
            break;
        }
        match placed {
            Some(p) => plan.placed.push(p),
            None => plan
                .dropped
                .push(DroppedInstance { content: spec.content.clone(), reason: DropReason::PlacementExhausted }),
        }
    }
    plan
}
