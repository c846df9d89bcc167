use image::GrayImage;
use serde::{Deserialize, Serialize};

use super::{SizeClass, TextRegionMask};
use crate::loss::Tensor;

/// Loss weight of one pixel; ordered from smallest to largest weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionWeight {
    MinorText,
    MajorText,
    Background,
}

impl RegionWeight {
    pub const ALL: [RegionWeight; 3] = [RegionWeight::MinorText, RegionWeight::MajorText, RegionWeight::Background];

    pub fn weight(self) -> f64 {
        match self {
            RegionWeight::MinorText => 0.2,
            RegionWeight::MajorText => 0.6,
            RegionWeight::Background => 1.0,
        }
    }

    /// 8-bit level used when the map is stored as a grayscale image.
    pub fn gray_level(self) -> u8 {
        match self {
            RegionWeight::MinorText => 51,
            RegionWeight::MajorText => 153,
            RegionWeight::Background => 255,
        }
    }

    pub fn from_gray_level(level: u8) -> Option<Self> {
        RegionWeight::ALL.into_iter().find(|w| w.gray_level() == level)
    }
}

impl From<SizeClass> for RegionWeight {
    fn from(class: SizeClass) -> Self {
        match class {
            SizeClass::Major => RegionWeight::MajorText,
            SizeClass::Minor => RegionWeight::MinorText,
        }
    }
}

/// Per-pixel loss weights over a poster canvas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMap {
    width: u32,
    height: u32,
    cells: Vec<RegionWeight>,
}

impl WeightMap {
    /// Rasterizes text-region masks: 1.0 outside every mask, 0.6 inside major
    /// masks, 0.2 inside minor masks. Where masks overlap the smaller weight
    /// wins.
    pub fn rasterize(masks: &[TextRegionMask], width: u32, height: u32) -> Self {
        let mut cells = vec![RegionWeight::Background; width as usize * height as usize];
        for mask in masks {
            let class = RegionWeight::from(mask.size_class);
            let [x0, y0, x1, y1] = mask.box_2d.to_pixels(width, height);
            for y in y0..y1 {
                let row = y as usize * width as usize;
                for cell in &mut cells[row + x0 as usize..row + x1 as usize] {
                    *cell = (*cell).min(class);
                }
            }
        }
        WeightMap { width, height, cells }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> RegionWeight {
        self.cells[y as usize * self.width as usize + x as usize]
    }

    pub fn weight(&self, x: u32, y: u32) -> f64 {
        self.get(x, y).weight()
    }

    pub fn cells(&self) -> &[RegionWeight] {
        &self.cells
    }

    /// The map as an `[height, width]` tensor of weights.
    pub fn to_tensor(&self) -> Tensor {
        let data = self.cells.iter().map(|c| c.weight()).collect();
        Tensor::new(vec![self.height as usize, self.width as usize], data).expect("cell count matches dims")
    }

    pub fn to_gray_image(&self) -> GrayImage {
        let raw = self.cells.iter().map(|c| c.gray_level()).collect();
        GrayImage::from_raw(self.width, self.height, raw).expect("cell count matches dims")
    }

    /// Inverse of [`WeightMap::to_gray_image`]; `None` on levels outside the mapping.
    pub fn from_gray_image(image: &GrayImage) -> Option<Self> {
        let cells = image
            .as_raw()
            .iter()
            .map(|&l| RegionWeight::from_gray_level(l))
            .collect::<Option<Vec<_>>>()?;
        Some(WeightMap { width: image.width(), height: image.height(), cells })
    }

    /// Number of pixels per weight class, smallest weight first.
    pub fn histogram(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for c in &self.cells {
            counts[*c as usize] += 1;
        }
        counts
    }
}
