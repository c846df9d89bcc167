use std::fmt;

use image::imageops::FilterType;
use image::DynamicImage;
use md5::{Digest, Md5};

/// MD5 digest of a file's bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentHash(pub [u8; 16]);

impl ContentHash {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn content_hash(bytes: &[u8]) -> ContentHash {
    ContentHash(Md5::digest(bytes).into())
}

/// 64-bit difference hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerceptualHash(pub u64);

impl fmt::Display for PerceptualHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

pub fn hamming_distance(a: PerceptualHash, b: PerceptualHash) -> u32 {
    (a.0 ^ b.0).count_ones()
}

/// Difference hash: the image is reduced to a 9x8 grayscale thumbnail and
/// each bit records whether a pixel is darker than its right neighbour.
pub fn dhash(image: &DynamicImage) -> PerceptualHash {
    let thumb = image::imageops::resize(&image.to_luma8(), 9, 8, FilterType::Triangle);
    let mut bits = 0u64;
    for y in 0..8 {
        for x in 0..8 {
            bits <<= 1;
            if thumb.get_pixel(x, y).0[0] < thumb.get_pixel(x + 1, y).0[0] {
                bits |= 1;
            }
        }
    }
    PerceptualHash(bits)
}
