//! Glyph rasterization and compositing onto backgrounds.

use image::RgbImage;

use super::layout::margin_for;
use super::{Canvas, FontLibrary, ForgeError, GenerationConfig, Orientation, PlacedInstance};

/// Per-pixel ink coverage in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl CoverageMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0.0; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Adds coverage at a pixel, ignoring positions outside the mask.
    pub fn add(&mut self, x: i64, y: i64, c: f32) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let v = &mut self.data[y as usize * self.width as usize + x as usize];
        *v = (*v + c).min(1.0);
    }

    /// Fills a rectangle with area-weighted coverage at the edges.
    pub fn fill_rect(&mut self, x0: f32, y0: f32, x1: f32, y1: f32) {
        let (px0, px1) = (x0.floor() as i64, x1.ceil() as i64);
        let (py0, py1) = (y0.floor() as i64, y1.ceil() as i64);
        for py in py0..py1 {
            let cy = (y1.min(py as f32 + 1.0) - y0.max(py as f32)).max(0.0);
            if cy <= 0.0 {
                continue;
            }
            for px in px0..px1 {
                let cx = (x1.min(px as f32 + 1.0) - x0.max(px as f32)).max(0.0);
                if cx > 0.0 {
                    self.add(px, py, cx * cy);
                }
            }
        }
    }

    fn sample_bilinear(&self, x: f32, y: f32) -> f32 {
        // Pixel centers sit at half-integer coordinates.
        let fx = x - 0.5;
        let fy = y - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let tx = fx - x0;
        let ty = fy - y0;
        let at = |xi: f32, yi: f32| {
            if xi < 0.0 || yi < 0.0 || xi >= self.width as f32 || yi >= self.height as f32 {
                0.0
            } else {
                self.get(xi as u32, yi as u32)
            }
        };
        let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1.0, y0) * tx;
        let bottom = at(x0, y0 + 1.0) * (1.0 - tx) + at(x0 + 1.0, y0 + 1.0) * tx;
        top * (1.0 - ty) + bottom * ty
    }

    /// Bounding box `(x0, y0, x1, y1)` of pixels with any coverage.
    pub fn inked_bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) > 0.0 {
                    b = Some(match b {
                        None => (x, y, x + 1, y + 1),
                        Some((a, c, d, e)) => (a.min(x), c.min(y), d.max(x + 1), e.max(y + 1)),
                    });
                }
            }
        }
        b
    }
}

/// Rasterizes one placed instance into a mask the size of its box.
pub fn render_instance_mask(
    instance: &PlacedInstance,
    fonts: &FontLibrary,
) -> Result<CoverageMask, ForgeError> {
    let spec = &instance.spec;
    let face = fonts
        .get(&spec.font_id)
        .ok_or_else(|| ForgeError::Config(format!("unknown font {}", spec.font_id)))?;
    let px = spec.font_size_px;
    // Same geometry as layout::measure_block, applied to the planned lines.
    let line_height = face.line_height(px);
    let margin = margin_for(px);
    let content_width = instance.lines.iter().map(|l| face.line_width(l, px)).fold(0.0, f32::max);
    let block_w = ((content_width + face.overhang(px)).ceil() + 2.0 * margin) as u32;
    let block_h = ((instance.lines.len() as f32 * line_height).ceil() + 2.0 * margin) as u32;

    let mut block = CoverageMask::new(block_w, block_h);
    for (i, line) in instance.lines.iter().enumerate() {
        let lw = face.line_width(line, px);
        let mut x = margin + spec.alignment.offset(content_width, lw);
        let top = margin + i as f32 * line_height;
        for c in line.chars() {
            face.draw_glyph(c, px, x, top, &mut block);
            x += face.advance(c, px);
        }
    }

    let (w, h) = (instance.bbox.width(), instance.bbox.height());
    let mut out = CoverageMask::new(w, h);
    match spec.orientation {
        Orientation::VerticalRotated => {
            // Quarter turn clockwise: text reads top to bottom.
            for y in 0..h.min(block_w) {
                for x in 0..w.min(block_h) {
                    out.data[(y * w + x) as usize] = block.get(y, block_h - 1 - x);
                }
            }
        }
        _ if spec.rotation_deg == 0.0 => {
            for y in 0..h.min(block_h) {
                for x in 0..w.min(block_w) {
                    out.data[(y * w + x) as usize] = block.get(x, y);
                }
            }
        }
        _ => {
            let (s, c) = (-spec.rotation_deg).to_radians().sin_cos();
            let (s, c) = (s as f32, c as f32);
            let (cx, cy) = (w as f32 / 2.0, h as f32 / 2.0);
            let (bx, by) = (block_w as f32 / 2.0, block_h as f32 / 2.0);
            for y in 0..h {
                for x in 0..w {
                    let dx = x as f32 + 0.5 - cx;
                    let dy = y as f32 + 0.5 - cy;
                    let sx = dx * c - dy * s + bx;
                    let sy = dx * s + dy * c + by;
                    out.data[(y * w + x) as usize] = block.sample_bilinear(sx, sy);
                }
            }
        }
    }
    Ok(out)
}

/// Center-crops the background to the canvas. Backgrounds smaller than the
/// canvas are a configuration error.
pub fn fit_background(background: &RgbImage, canvas: &Canvas) -> Result<RgbImage, ForgeError> {
    let (bw, bh) = background.dimensions();
    if bw < canvas.width || bh < canvas.height {
        return Err(ForgeError::BackgroundTooSmall {
            width: bw,
            height: bh,
            canvas_width: canvas.width,
            canvas_height: canvas.height,
        });
    }
    if (bw, bh) == (canvas.width, canvas.height) {
        return Ok(background.clone());
    }
    let x = (bw - canvas.width) / 2;
    let y = (bh - canvas.height) / 2;
    Ok(image::imageops::crop_imm(background, x, y, canvas.width, canvas.height).to_image())
}

/// Composites every placement onto (a canvas-sized crop of) the background.
/// Only pixels inside placement boxes are touched.
pub fn render_sample(
    background: &RgbImage,
    placements: &[PlacedInstance],
    fonts: &FontLibrary,
    config: &GenerationConfig,
) -> Result<RgbImage, ForgeError> {
    let mut img = fit_background(background, &config.canvas())?;
    for inst in placements {
        let mask = render_instance_mask(inst, fonts)?;
        let color = inst.spec.rgb.map(|c| c as f32);
        for y in 0..mask.height() {
            for x in 0..mask.width() {
                let a = mask.get(x, y);
                if a <= 0.0 {
                    continue;
                }
                let p = img.get_pixel_mut(inst.bbox.x0 + x, inst.bbox.y0 + y);
                for ch in 0..3 {
                    let v = p.0[ch] as f32 * (1.0 - a) + color[ch] * a;
                    p.0[ch] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(img)
}
