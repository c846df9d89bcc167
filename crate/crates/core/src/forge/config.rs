use serde::{Deserialize, Serialize};

use super::ForgeError;

/// Knobs for synthetic sample generation. Every field has a default, so a
/// config file only needs to list the values it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    /// Weights for drawing 1, 2 or 3 text instances per sample.
    pub instance_count_weights: [f64; 3],
    pub alphanumeric_fraction: f64,
    pub stylized_font_fraction: f64,
    pub font_mention_probability: f64,
    pub rotation_probability: f64,
    pub rotation_range_deg: [f64; 2],
    pub max_placement_attempts: u32,
    pub master_seed: u64,
    /// Canvas width and height in pixels.
    pub canvas_size: [u32; 2],
    /// Weights for horizontal, vertically rotated and vertically stacked text.
    pub orientation_weights: [f64; 3],
    /// Font size range as a fraction of the shorter canvas side.
    pub font_size_range: [f64; 2],
    /// Lines wrap once they would exceed this fraction of the cell width.
    pub wrap_width_fraction: f64,
    pub max_lines: u32,
    pub collision_padding_px: u32,
    pub shrink_factor: f64,
    /// First attempt (1-based) at which the font size starts shrinking.
    pub shrink_from_attempt: u32,
    pub color_jitter: u8,
    /// Vertical text longer than this is laid out horizontally instead.
    pub max_vertical_chars: usize,
    pub vary_casing: bool,
    pub vary_punctuation: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            instance_count_weights: [1.0 / 3.0; 3],
            alphanumeric_fraction: 0.15,
            stylized_font_fraction: 0.5,
            font_mention_probability: 0.5,
            rotation_probability: 0.10,
            rotation_range_deg: [-15.0, 15.0],
            max_placement_attempts: 5,
            master_seed: 0,
            canvas_size: [1024, 1024],
            orientation_weights: [0.7, 0.15, 0.15],
            font_size_range: [0.03, 0.08],
            wrap_width_fraction: 0.9,
            max_lines: 3,
            collision_padding_px: 4,
            shrink_factor: 0.9,
            shrink_from_attempt: 3,
            color_jitter: 16,
            max_vertical_chars: 12,
            vary_casing: true,
            vary_punctuation: true,
        }
    }
}

fn probability(name: &str, p: f64) -> Result<(), ForgeError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ForgeError::Config(format!("{name} must lie in [0, 1], got {p}")))
    }
}

fn weights(name: &str, w: &[f64]) -> Result<(), ForgeError> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(ForgeError::Config(format!("{name} must be non-negative")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(ForgeError::Config(format!("{name} must sum to 1, got {sum}")));
    }
    Ok(())
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ForgeError> {
        weights("instance_count_weights", &self.instance_count_weights)?;
        weights("orientation_weights", &self.orientation_weights)?;
        probability("alphanumeric_fraction", self.alphanumeric_fraction)?;
        probability("stylized_font_fraction", self.stylized_font_fraction)?;
        probability("font_mention_probability", self.font_mention_probability)?;
        probability("rotation_probability", self.rotation_probability)?;
        let [lo, hi] = self.rotation_range_deg;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= -90.0 && hi <= 90.0) {
            return Err(ForgeError::Config(format!(
                "rotation_range_deg must be an ordered interval within [-90, 90], got [{lo}, {hi}]"
            )));
        }
        if self.max_placement_attempts == 0 {
            return Err(ForgeError::Config("max_placement_attempts must be at least 1".into()));
        }
        let [w, h] = self.canvas_size;
        if w < 256 || h < 256 {
            return Err(ForgeError::Config(format!("canvas must be at least 256x256, got {w}x{h}")));
        }
        let [fmin, fmax] = self.font_size_range;
        if !(fmin > 0.0 && fmin <= fmax && fmax <= 1.0) {
            return Err(ForgeError::Config(format!(
                "font_size_range must satisfy 0 < min <= max <= 1, got [{fmin}, {fmax}]"
            )));
        }
        if !(self.wrap_width_fraction > 0.0 && self.wrap_width_fraction <= 1.0) {
            return Err(ForgeError::Config("wrap_width_fraction must lie in (0, 1]".into()));
        }
        if self.max_lines == 0 {
            return Err(ForgeError::Config("max_lines must be at least 1".into()));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor <= 1.0) {
            return Err(ForgeError::Config("shrink_factor must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub(crate) fn canvas(&self) -> Canvas {
        Canvas::new(self.canvas_size[0], self.canvas_size[1])
    }
}

/// Canvas dimensions plus the fixed 3x3 grid partition over them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    /// Half-open pixel range `[x0, x1) x [y0, y1)` covered by a grid cell.
    pub fn cell_region(&self, cell: GridCell) -> PixelBox {
        let edge = |i: u32, n: u32| (i as u64 * n as u64).div_ceil(3) as u32;
        PixelBox {
            x0: edge(cell.col as u32, self.width),
            y0: edge(cell.row as u32, self.height),
            x1: edge(cell.col as u32 + 1, self.width),
            y1: edge(cell.row as u32 + 1, self.height),
        }
    }

    pub fn contains(&self, b: &PixelBox) -> bool {
        b.x0 < b.x1 && b.y0 < b.y1 && b.x1 <= self.width && b.y1 <= self.height
    }
}

/// Position in the 3x3 layout grid, row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub row: u8,
    pub col: u8,
}

impl GridCell {
    pub const ALL: [GridCell; 9] = {
        let mut cells = [GridCell { row: 0, col: 0 }; 9];
        let mut i = 0;
        while i < 9 {
            cells[i] = GridCell { row: (i / 3) as u8, col: (i % 3) as u8 };
            i += 1;
        }
        cells
    };

    pub fn new(row: u8, col: u8) -> Option<Self> {
        (row < 3 && col < 3).then_some(Self { row, col })
    }

    pub fn position_name(self) -> &'static str {
        POSITION_NAMES[(self.row * 3 + self.col) as usize]
    }

    pub fn from_position_name(name: &str) -> Option<Self> {
        POSITION_NAMES.iter().position(|n| *n == name).map(|i| Self::ALL[i])
    }
}

pub(crate) const POSITION_NAMES: [&str; 9] = [
    "top left",
    "top center",
    "top right",
    "middle left",
    "center",
    "middle right",
    "bottom left",
    "bottom center",
    "bottom right",
];

/// Axis-aligned half-open pixel box, serialized as `[x0, y0, x1, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct PixelBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl From<[u32; 4]> for PixelBox {
    fn from([x0, y0, x1, y1]: [u32; 4]) -> Self {
        Self { x0, y0, x1, y1 }
    }
}

impl From<PixelBox> for [u32; 4] {
    fn from(b: PixelBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl PixelBox {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn intersects(&self, other: &PixelBox) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// True when the boxes are closer than `pad` pixels on both axes.
    pub fn within_padding(&self, other: &PixelBox, pad: u32) -> bool {
        let grown = PixelBox {
            x0: self.x0.saturating_sub(pad),
            y0: self.y0.saturating_sub(pad),
            x1: self.x1 + pad,
            y1: self.y1 + pad,
        };
        grown.intersects(other)
    }
}
