use std::fs;
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

/// File magic of persisted distance matrices.
pub const MATRIX_MAGIC: &[u8; 8] = b"MDISTMAT";

/// Layout: 8-byte magic, `m` and `n` as little-endian u64, then `m·n`
/// little-endian f64 values in row-major order.
pub fn encode_matrix(matrix: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 8 * matrix.as_slice().len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.cols() as u64).to_le_bytes());
    for v in matrix.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < 24 || &bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Format("not a distance-matrix file".into()));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (m, n) = (word(8) as usize, word(16) as usize);
    let expected = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(24))
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{m}x{n} matrix needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let data = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Matrix::from_vec(m, n, data))
}

pub fn write_distance_matrix(path: impl AsRef<Path>, matrix: &Matrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_matrix(matrix)).map_err(|e| Error::io(path, e))
}

pub fn read_distance_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes)
}
