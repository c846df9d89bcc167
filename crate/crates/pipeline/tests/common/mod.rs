#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use posterkit::config::StageConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn write_jsonl(path: &Path, rows: &[Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    fs::write(path, text).unwrap();
}

pub fn read_lines(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// A PNG of uniform noise; distinct seeds give unrelated images.
pub fn noise_png(path: &Path, seed: u64, w: u32, h: u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let img = RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()]));
    img.save(path).unwrap();
}

/// Parses a TOML config and resolves its paths against `base`.
pub fn config(base: &Path, toml_text: &str) -> StageConfig {
    let mut c: StageConfig = toml::from_str(toml_text).unwrap();
    c.resolve_paths(base);
    c
}

pub fn manifest(dir: &Path) -> PathBuf {
    dir.join("manifest.jsonl")
}
