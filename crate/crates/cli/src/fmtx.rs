//! The feature-matrix interchange file: a 16-byte header (magic `FMTX`,
//! version, rows, cols) followed by row-major little-endian f32 values.
//! Rows carry the 38 conditioning features plus the 16 derived LPC
//! coefficients.

use std::path::Path;

use vocoder_core::dsp::LPC_ORDER;
use vocoder_core::features::NUM_FEATURES;
use vocoder_core::{Error, Result};

use crate::util::write_atomic;

pub const FMTX_MAGIC: [u8; 4] = *b"FMTX";
pub const FMTX_VERSION: u32 = 1;
/// Columns per row: 38 conditioning features + 16 LPC coefficients.
pub const FMTX_COLS: usize = NUM_FEATURES + LPC_ORDER;

/// Serializes rows (each `FMTX_COLS` wide) and writes the file atomically.
pub fn write_fmtx(path: &Path, rows: &[Vec<f32>]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + rows.len() * FMTX_COLS * 4);
    buf.extend_from_slice(&FMTX_MAGIC);
    buf.extend_from_slice(&FMTX_VERSION.to_le_bytes());
    buf.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(FMTX_COLS as u32).to_le_bytes());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != FMTX_COLS {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} values, expected {FMTX_COLS}",
                row.len()
            )));
        }
        for &v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_atomic(path, &buf)
}

/// Reads a feature matrix, validating header and length.
pub fn read_fmtx(path: &Path) -> Result<Vec<Vec<f32>>> {
    let data = std::fs::read(path)?;
    if data.len() < 16 {
        return Err(Error::format(0, "file too short for an FMTX header"));
    }
    if data[..4] != FMTX_MAGIC {
        return Err(Error::format(0, "bad magic, expected \"FMTX\""));
    }
    let u32_at = |off: usize| u32::from_le_bytes(data[off..off + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != FMTX_VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let rows = u32_at(8) as usize;
    let cols = u32_at(12) as usize;
    if cols != FMTX_COLS {
        return Err(Error::format(12, format!("expected {FMTX_COLS} columns, got {cols}")));
    }
    let want = 16 + rows * cols * 4;
    if data.len() != want {
        return Err(Error::format(
            16,
            format!("expected {want} bytes for {rows} rows, got {}", data.len()),
        ));
    }
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let base = 16 + r * cols * 4;
        let mut row = Vec::with_capacity(cols);
        for c in 0..cols {
            let off = base + c * 4;
            let v = f32::from_le_bytes(data[off..off + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::format(off as u64, "non-finite value"));
            }
            row.push(v);
        }
        out.push(row);
    }
    Ok(out)
}
