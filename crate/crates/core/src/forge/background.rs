use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::Rng;

use super::{Canvas, ForgeError};
use crate::seed::rng_for;

/// Where sample backgrounds come from.
#[derive(Debug, Clone)]
pub enum BackgroundSource {
    /// PNG/JPEG files; ids are paths relative to the directory.
    Directory { root: PathBuf, ids: Vec<String> },
    /// Seeded gradient backgrounds generated on demand.
    Procedural { count: u32 },
}

impl BackgroundSource {
    pub fn load_dir(root: &Path) -> Result<Self, ForgeError> {
        let mut ids = Vec::new();
        collect_images(root, root, &mut ids)?;
        if ids.is_empty() {
            return Err(ForgeError::Config(format!("no background images in {}", root.display())));
        }
        ids.sort();
        Ok(Self::Directory { root: root.to_path_buf(), ids })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Directory { ids, .. } => ids.len(),
            Self::Procedural { count } => *count as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, k: usize) -> String {
        match self {
            Self::Directory { ids, .. } => ids[k].clone(),
            Self::Procedural { .. } => format!("procedural-{k:04}"),
        }
    }

    pub fn load(&self, id: &str, canvas: &Canvas) -> Result<RgbImage, ForgeError> {
        match self {
            Self::Directory { root, .. } => {
                let path = root.join(id);
                let img = image::open(&path).map_err(|e| ForgeError::Image(format!("{}: {e}", path.display())))?;
                Ok(img.to_rgb8())
            }
            Self::Procedural { .. } => {
                let k: u64 = id
                    .strip_prefix("procedural-")
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| ForgeError::Config(format!("unknown background {id}")))?;
                Ok(procedural_background(k, canvas))
            }
        }
    }
}

fn collect_images(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<(), ForgeError> {
    for entry in fs::read_dir(dir).map_err(|e| ForgeError::io(dir, e))? {
        let path = entry.map_err(|e| ForgeError::io(dir, e))?.path();
        if path.is_dir() {
            collect_images(root, &path, out)?;
            continue;
        }
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            let rel = path.strip_prefix(root).unwrap_or(&path);
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Diagonal two-color gradient with a few soft blobs.
pub fn procedural_background(k: u64, canvas: &Canvas) -> RgbImage {
    let mut rng = rng_for(k ^ 0x6267_5f73_6565_6400);
    let a: [f32; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
    let b: [f32; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
    let (w, h) = (canvas.width as f32, canvas.height as f32);
    let blobs: Vec<(f32, f32, f32, [f32; 3])> = (0..rng.random_range(2..6))
        .map(|_| {
            let c: [f32; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
            (rng.random_range(0.0..w), rng.random_range(0.0..h), rng.random_range(0.1..0.4) * w.min(h), c)
        })
        .collect();
    let field = |x: f32, y: f32| -> [f32; 3] {
        let t = (x / w + y / h) / 2.0;
        let mut px: [f32; 3] = std::array::from_fn(|i| a[i] * (1.0 - t) + b[i] * t);
        for (bx, by, r, c) in &blobs {
            let wgt = 0.6 * (-((x - bx).powi(2) + (y - by).powi(2)) / (r * r)).exp();
            for i in 0..3 {
                px[i] = px[i] * (1.0 - wgt) + c[i] * wgt;
            }
        }
        px
    };
    // The field is smooth, so it is sampled every STEP pixels and
    // interpolated bilinearly in between.
    const STEP: u32 = 8;
    let gw = canvas.width.div_ceil(STEP) as usize + 1;
    let gh = canvas.height.div_ceil(STEP) as usize + 1;
    let grid: Vec<[f32; 3]> = (0..gh)
        .flat_map(|j| (0..gw).map(move |i| (i, j)))
        .map(|(i, j)| field((i as u32 * STEP) as f32, (j as u32 * STEP) as f32))
        .collect();
    let mut img = RgbImage::new(canvas.width, canvas.height);
    let mut row = vec![[0f32; 3]; gw];
    for y in 0..canvas.height {
        let j = (y / STEP) as usize;
        let fy = (y % STEP) as f32 / STEP as f32;
        for (i, cell) in row.iter_mut().enumerate() {
            let (top, bottom) = (grid[j * gw + i], grid[(j + 1) * gw + i]);
            *cell = std::array::from_fn(|c| top[c] + (bottom[c] - top[c]) * fy);
        }
        for x in 0..canvas.width {
            let i = (x / STEP) as usize;
            let fx = (x % STEP) as f32 / STEP as f32;
            let (l, r) = (row[i], row[i + 1]);
            let px: [f32; 3] = std::array::from_fn(|c| l[c] + (r[c] - l[c]) * fx);
            // `as u8` saturates, so this rounds half up and clamps to 0..=255.
            img.put_pixel(x, y, Rgb(px.map(|v| (v + 0.5) as u8)));
        }
    }
    img
}
