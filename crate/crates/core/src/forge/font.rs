//! Font library: builtin bitmap faces plus any TrueType/OpenType files found
//! in a font directory.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use ab_glyph::{Font, FontArc, PxScale, ScaleFont};
use font8x8::legacy::{BASIC_LEGACY, LATIN_LEGACY};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::render::CoverageMask;
use super::{ForgeError, GenerationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FontClass {
    Classic,
    Stylized,
}

impl FontClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FontClass::Classic => "classic",
            FontClass::Stylized => "stylized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BitmapStyle {
    Regular,
    Bold,
    Italic,
    Shadow,
}

#[derive(Clone)]
enum FaceKind {
    Bitmap { style: BitmapStyle, caps_only: bool },
    Outline(FontArc),
}

/// One usable typeface.
#[derive(Clone)]
pub struct FontFace {
    id: String,
    class: FontClass,
    kind: FaceKind,
}

impl fmt::Debug for FontFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FontFace").field("id", &self.id).field("class", &self.class).finish()
    }
}

// Horizontal advance of a bitmap glyph relative to the font size.
const BITMAP_ADVANCE: f32 = 0.75;
const BITMAP_LINE: f32 = 1.25;
const ITALIC_SHEAR: f32 = 0.2;

fn bitmap_rows(c: char) -> Option<[u8; 8]> {
    let code = c as u32;
    match code {
        0x20..=0x7e => Some(BASIC_LEGACY[code as usize]),
        0xa0..=0xff => Some(LATIN_LEGACY[(code - 0xa0) as usize]),
        _ => None,
    }
}

impl FontFace {
    fn bitmap(id: &str, class: FontClass, style: BitmapStyle, caps_only: bool) -> Self {
        Self { id: id.to_string(), class, kind: FaceKind::Bitmap { style, caps_only } }
    }

    /// Builtin display face that carries no lowercase glyphs.
    pub fn builtin_caps() -> Self {
        Self::bitmap("builtin-caps", FontClass::Stylized, BitmapStyle::Regular, true)
    }

    pub fn builtin_sans() -> Self {
        Self::bitmap("builtin-sans", FontClass::Classic, BitmapStyle::Regular, false)
    }

    pub fn from_bytes(id: &str, class: FontClass, bytes: Vec<u8>) -> Result<Self, ForgeError> {
        let font = FontArc::try_from_vec(bytes)
            .map_err(|e| ForgeError::Config(format!("font {id}: {e}")))?;
        Ok(Self { id: id.to_string(), class, kind: FaceKind::Outline(font) })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn class(&self) -> FontClass {
        self.class
    }

    pub fn covers(&self, c: char) -> bool {
        if c.is_whitespace() {
            return true;
        }
        match &self.kind {
            FaceKind::Bitmap { caps_only, .. } => {
                bitmap_rows(c).is_some() && !(*caps_only && c.is_lowercase())
            }
            FaceKind::Outline(font) => font.glyph_id(c).0 != 0,
        }
    }

    pub fn covers_text(&self, text: &str) -> bool {
        text.chars().all(|c| self.covers(c))
    }

    pub fn supports_lowercase(&self) -> bool {
        ('a'..='z').all(|c| self.covers(c))
    }

    pub fn advance(&self, c: char, px: f32) -> f32 {
        match &self.kind {
            FaceKind::Bitmap { .. } => px * BITMAP_ADVANCE,
            FaceKind::Outline(font) => {
                let scaled = font.as_scaled(PxScale::from(px));
                scaled.h_advance(font.glyph_id(c))
            }
        }
    }

    pub fn line_height(&self, px: f32) -> f32 {
        match &self.kind {
            FaceKind::Bitmap { .. } => px * BITMAP_LINE,
            FaceKind::Outline(font) => {
                let scaled = font.as_scaled(PxScale::from(px));
                scaled.height() + scaled.line_gap().max(0.0)
            }
        }
    }

    /// Extra width a line needs beyond its advances (slanted or shadowed
    /// faces reach past the last advance).
    pub fn overhang(&self, px: f32) -> f32 {
        match &self.kind {
            FaceKind::Bitmap { style: BitmapStyle::Italic, .. } => px * ITALIC_SHEAR,
            FaceKind::Bitmap { style: BitmapStyle::Shadow, .. } => px / 8.0,
            FaceKind::Bitmap { style: BitmapStyle::Bold, .. } => px * BITMAP_ADVANCE / 8.0,
            _ => 0.0,
        }
    }

    pub fn line_width(&self, line: &str, px: f32) -> f32 {
        line.chars().map(|c| self.advance(c, px)).sum()
    }

    /// Draws `c` with its line box starting at `(x, top)`.
    pub(crate) fn draw_glyph(&self, c: char, px: f32, x: f32, top: f32, mask: &mut CoverageMask) {
        if c.is_whitespace() {
            return;
        }
        match &self.kind {
            FaceKind::Bitmap { style, .. } => {
                let Some(rows) = bitmap_rows(c) else { return };
                let sx = px * BITMAP_ADVANCE / 8.0;
                let sy = px / 8.0;
                let mut draw = |dx: f32, dy: f32| {
                    for (r, bits) in rows.iter().enumerate() {
                        let mut bits = *bits as u16;
                        if *style == BitmapStyle::Bold {
                            bits |= bits << 1;
                        }
                        let shear = match style {
                            BitmapStyle::Italic => (7 - r) as f32 / 8.0 * px * ITALIC_SHEAR,
                            _ => 0.0,
                        };
                        let y0 = top + dy + r as f32 * sy;
                        for col in 0..9 {
                            if bits & (1 << col) != 0 {
                                let x0 = x + dx + shear + col as f32 * sx;
                                mask.fill_rect(x0, y0, x0 + sx, y0 + sy);
                            }
                        }
                    }
                };
                draw(0.0, 0.0);
                if *style == BitmapStyle::Shadow {
                    draw(px / 8.0, px / 10.0);
                }
            }
            FaceKind::Outline(font) => {
                let scaled = font.as_scaled(PxScale::from(px));
                let glyph = font
                    .glyph_id(c)
                    .with_scale_and_position(px, ab_glyph::point(x, top + scaled.ascent()));
                if let Some(outlined) = font.outline_glyph(glyph) {
                    let bounds = outlined.px_bounds();
                    let (ox, oy) = (bounds.min.x as i64, bounds.min.y as i64);
                    outlined.draw(|gx, gy, cov| mask.add(ox + gx as i64, oy + gy as i64, cov));
                }
            }
        }
    }
}

/// The set of faces available to the forge.
#[derive(Debug, Clone, Default)]
pub struct FontLibrary {
    faces: Vec<Arc<FontFace>>,
}

impl FontLibrary {
    pub fn new(faces: Vec<FontFace>) -> Self {
        Self { faces: faces.into_iter().map(Arc::new).collect() }
    }

    /// Five bitmap faces: two classic, three stylized (one of which has no
    /// lowercase and is filtered out at selection time).
    pub fn builtin() -> Self {
        Self::new(vec![
            FontFace::builtin_sans(),
            FontFace::bitmap("builtin-bold", FontClass::Classic, BitmapStyle::Bold, false),
            FontFace::bitmap("builtin-italic", FontClass::Stylized, BitmapStyle::Italic, false),
            FontFace::bitmap("builtin-shadow", FontClass::Stylized, BitmapStyle::Shadow, false),
            FontFace::builtin_caps(),
        ])
    }

    /// Loads every `.ttf`/`.otf` file under `dir`. Files below a directory
    /// named `stylized` are stylized; all others are classic. Ids are the
    /// path relative to `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, ForgeError> {
        let mut paths = Vec::new();
        collect_fonts(dir, &mut paths)?;
        paths.sort();
        let mut faces = Vec::with_capacity(paths.len());
        for path in paths {
            let rel = path.strip_prefix(dir).unwrap_or(&path);
            let class = if rel.components().any(|c| c.as_os_str() == "stylized") {
                FontClass::Stylized
            } else {
                FontClass::Classic
            };
            let id = rel.to_string_lossy().replace('\\', "/");
            let bytes = fs::read(&path).map_err(|e| ForgeError::io(&path, e))?;
            faces.push(FontFace::from_bytes(&id, class, bytes)?);
        }
        if faces.is_empty() {
            return Err(ForgeError::Config(format!("no fonts found in {}", dir.display())));
        }
        Ok(Self::new(faces))
    }

    pub fn faces(&self) -> impl Iterator<Item = &FontFace> {
        self.faces.iter().map(|f| f.as_ref())
    }

    pub fn get(&self, id: &str) -> Option<&FontFace> {
        self.faces().find(|f| f.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

fn collect_fonts(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<(), ForgeError> {
    for entry in fs::read_dir(dir).map_err(|e| ForgeError::io(dir, e))? {
        let path = entry.map_err(|e| ForgeError::io(dir, e))?.path();
        if path.is_dir() {
            collect_fonts(&path, out)?;
        } else if path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("ttf") || e.eq_ignore_ascii_case("otf"))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Picks a face that has lowercase glyphs and covers `content`. The class is
/// drawn first; when no candidate of that class exists the other class is
/// used.
pub fn select_font<'a>(
    rng: &mut impl Rng,
    library: &'a FontLibrary,
    content: &str,
    config: &GenerationConfig,
) -> Result<&'a FontFace, ForgeError> {
    let want = if rng.random_bool(config.stylized_font_fraction) {
        FontClass::Stylized
    } else {
        FontClass::Classic
    };
    let candidates: Vec<&FontFace> = library
        .faces()
        .filter(|f| f.supports_lowercase() && f.covers_text(content))
        .collect();
    if candidates.is_empty() {
        return Err(ForgeError::NoCoveringFont(content.to_string()));
    }
    let preferred: Vec<&FontFace> = candidates.iter().copied().filter(|f| f.class == want).collect();
    let pool = if preferred.is_empty() { &candidates } else { &preferred };
    Ok(pool.choose(rng).copied().expect("non-empty pool"))
}
