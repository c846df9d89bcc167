use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::response::{only_keys, parse_object, required, ResponseError};

/// Upper bound of normalized box coordinates.
pub const NORMALIZED_EXTENT: u32 = 1000;

/// A `[ymin, xmin, ymax, xmax]` box normalized to `[0, 1000]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct Box2d {
    ymin: u32,
    xmin: u32,
    ymax: u32,
    xmax: u32,
}

impl Box2d {
    pub fn new(ymin: u32, xmin: u32, ymax: u32, xmax: u32) -> Result<Self, String> {
        if ymax > NORMALIZED_EXTENT || xmax > NORMALIZED_EXTENT {
            return Err(format!("coordinates exceed {NORMALIZED_EXTENT}"));
        }
        if ymin >= ymax || xmin >= xmax {
            return Err("min must be strictly below max on both axes".into());
        }
        Ok(Box2d { ymin, xmin, ymax, xmax })
    }

    pub fn ymin(&self) -> u32 {
        self.ymin
    }

    pub fn xmin(&self) -> u32 {
        self.xmin
    }

    pub fn ymax(&self) -> u32 {
        self.ymax
    }

    pub fn xmax(&self) -> u32 {
        self.xmax
    }

    /// Share of the poster covered by the box.
    pub fn area_fraction(&self) -> f64 {
        let area = (self.ymax - self.ymin) as u64 * (self.xmax - self.xmin) as u64;
        area as f64 / (NORMALIZED_EXTENT as u64 * NORMALIZED_EXTENT as u64) as f64
    }

    /// Pixel rectangle `[x0, y0, x1, y1)` on a `width x height` canvas.
    /// Min edges round down and max edges round up so the box never shrinks.
    pub fn to_pixels(&self, width: u32, height: u32) -> [u32; 4] {
        let n = NORMALIZED_EXTENT as u64;
        let floor = |v: u32, size: u32| (v as u64 * size as u64 / n) as u32;
        let ceil = |v: u32, size: u32| (v as u64 * size as u64).div_ceil(n) as u32;
        [
            floor(self.xmin, width),
            floor(self.ymin, height),
            ceil(self.xmax, width),
            ceil(self.ymax, height),
        ]
    }
}

impl TryFrom<[u32; 4]> for Box2d {
    type Error = String;

    fn try_from(v: [u32; 4]) -> Result<Self, Self::Error> {
        Box2d::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Box2d> for [u32; 4] {
    fn from(b: Box2d) -> Self {
        [b.ymin, b.xmin, b.ymax, b.xmax]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Major,
    Minor,
}

/// Major iff the box covers at least `major_fraction_threshold` of the poster.
pub fn classify_mask(box_2d: &Box2d, major_fraction_threshold: f64) -> SizeClass {
    if box_2d.area_fraction() >= major_fraction_threshold {
        SizeClass::Major
    } else {
        SizeClass::Minor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextRegionMask {
    pub box_2d: Box2d,
    pub size_class: SizeClass,
    pub area_fraction: f64,
}

impl TextRegionMask {
    pub fn classify(box_2d: Box2d, major_fraction_threshold: f64) -> Self {
        TextRegionMask {
            box_2d,
            size_class: classify_mask(&box_2d, major_fraction_threshold),
            area_fraction: box_2d.area_fraction(),
        }
    }
}

const KEY: &str = "text_regions";

fn parse_box(value: &Value) -> Result<Box2d, ResponseError> {
    let coords = value
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| ResponseError::invalid(KEY, value, "expected [ymin, xmin, ymax, xmax]"))?;
    let mut v = [0u32; 4];
    for (slot, c) in v.iter_mut().zip(coords) {
        *slot = c
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| ResponseError::invalid(KEY, value, "coordinates must be non-negative integers"))?;
    }
    Box2d::try_from(v).map_err(|reason| ResponseError::invalid(KEY, value, reason))
}

/// Parses a text-region response: `{"text_regions": [[ymin, xmin, ymax, xmax], ...]}`.
/// An empty list means the poster has no text.
pub fn parse_text_regions(response: &str) -> Result<Vec<Box2d>, ResponseError> {
    let map = parse_object(response)?;
    only_keys(&map, &[KEY])?;
    let regions = required(&map, KEY)?;
    let list = regions
        .as_array()
        .ok_or_else(|| ResponseError::invalid(KEY, regions, "expected a list of boxes"))?;
    list.iter().map(parse_box).collect()
}
