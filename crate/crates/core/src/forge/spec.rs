use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FontClass, GridCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    VerticalRotated,
    VerticalStacked,
}

impl Orientation {
    pub const ALL: [Orientation; 3] =
        [Orientation::Horizontal, Orientation::VerticalRotated, Orientation::VerticalStacked];

    pub fn is_vertical(self) -> bool {
        self != Orientation::Horizontal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Left,
    Center,
    Right,
}

impl Alignment {
    pub const ALL: [Alignment; 3] = [Alignment::Left, Alignment::Center, Alignment::Right];

    /// Horizontal offset of a line of width `line` inside a block of width `block`.
    pub fn offset(self, block: f32, line: f32) -> f32 {
        match self {
            Alignment::Left => 0.0,
            Alignment::Center => (block - line) / 2.0,
            Alignment::Right => block - line,
        }
    }
}

/// The twelve named text colors. Each has an RGB target that rendering
/// jitters per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorCategory {
    Red,
    Orange,
    Yellow,
    Green,
    Teal,
    Blue,
    Navy,
    Purple,
    Pink,
    Brown,
    Black,
    White,
}

impl ColorCategory {
    pub const ALL: [ColorCategory; 12] = [
        ColorCategory::Red,
        ColorCategory::Orange,
        ColorCategory::Yellow,
        ColorCategory::Green,
        ColorCategory::Teal,
        ColorCategory::Blue,
        ColorCategory::Navy,
        ColorCategory::Purple,
        ColorCategory::Pink,
        ColorCategory::Brown,
        ColorCategory::Black,
        ColorCategory::White,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ColorCategory::Red => "red",
            ColorCategory::Orange => "orange",
            ColorCategory::Yellow => "yellow",
            ColorCategory::Green => "green",
            ColorCategory::Teal => "teal",
            ColorCategory::Blue => "blue",
            ColorCategory::Navy => "navy",
            ColorCategory::Purple => "purple",
            ColorCategory::Pink => "pink",
            ColorCategory::Brown => "brown",
            ColorCategory::Black => "black",
            ColorCategory::White => "white",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn target_rgb(self) -> [u8; 3] {
        match self {
            ColorCategory::Red => [220, 40, 40],
            ColorCategory::Orange => [245, 140, 30],
            ColorCategory::Yellow => [245, 215, 40],
            ColorCategory::Green => [50, 170, 70],
            ColorCategory::Teal => [30, 150, 150],
            ColorCategory::Blue => [40, 100, 230],
            ColorCategory::Navy => [25, 35, 110],
            ColorCategory::Purple => [130, 60, 180],
            ColorCategory::Pink => [240, 120, 180],
            ColorCategory::Brown => [130, 80, 40],
            ColorCategory::Black => [20, 20, 20],
            ColorCategory::White => [240, 240, 240],
        }
    }

    pub fn jittered(self, rng: &mut impl Rng, jitter: u8) -> [u8; 3] {
        let j = jitter as i16;
        self.target_rgb().map(|c| (c as i16 + rng.random_range(-j..=j)).clamp(0, 255) as u8)
    }
}

/// Everything needed to lay out and draw one text instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextInstanceSpec {
    pub content: String,
    pub font_id: String,
    pub font_class: FontClass,
    pub color_category: ColorCategory,
    pub rgb: [u8; 3],
    pub orientation: Orientation,
    pub alignment: Alignment,
    pub rotation_deg: f64,
    pub grid_cell: GridCell,
    pub font_size_px: f32,
}
