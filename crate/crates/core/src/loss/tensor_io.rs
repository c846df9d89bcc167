//! Flat binary tensor files.
//!
//! Layout, all little-endian: the magic `PKT1`, a `u32` rank, one `u64` per
//! dimension, then the row-major `f32` values.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::Tensor;

pub const MAGIC: &[u8; 4] = b"PKT1";
const MAX_RANK: u32 = 16;

#[derive(Debug, Error)]
pub enum TensorIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected \"PKT1\"")]
    BadMagic([u8; 4]),
    #[error("rank {0} exceeds the supported maximum")]
    Rank(u32),
    #[error("shape {0:?} is too large")]
    Oversized(Vec<u64>),
    #[error("trailing bytes after tensor data")]
    TrailingBytes,
}

pub fn write_tensor<W: Write>(mut w: W, tensor: &Tensor) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
    for &dim in tensor.shape() {
        w.write_all(&(dim as u64).to_le_bytes())?;
    }
    for &v in tensor.data() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Reads one tensor and requires the stream to end right after it.
pub fn read_tensor<R: Read>(mut r: R) -> Result<Tensor, TensorIoError> {
    let magic = read_array::<4, _>(&mut r)?;
    if &magic != MAGIC {
        return Err(TensorIoError::BadMagic(magic));
    }
    let rank = u32::from_le_bytes(read_array(&mut r)?);
    if rank > MAX_RANK {
        return Err(TensorIoError::Rank(rank));
    }
    let dims: Vec<u64> = (0..rank)
        .map(|_| read_array(&mut r).map(u64::from_le_bytes))
        .collect::<io::Result<_>>()?;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(usize::try_from(d).ok()?))
        .filter(|&n| n <= isize::MAX as usize / 8)
        .ok_or_else(|| TensorIoError::Oversized(dims.clone()))?;

    let mut data = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        data.push(f32::from_le_bytes(read_array(&mut r)?) as f64);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(TensorIoError::TrailingBytes);
    }
    let shape = dims.into_iter().map(|d| d as usize).collect();
    Ok(Tensor::new(shape, data).expect("element count matches shape"))
}
