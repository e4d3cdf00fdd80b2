//! Field snapshot file: little-endian, magic `VPMF`, `u32 d`, `u32 n`, `f64 t`,
//! then `n^d` `f64` values in row-major axis order.

use std::io::{Read, Write};
use std::path::Path;

use super::field::ScalarField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"VPMF";

pub fn encode_snapshot<T: Real>(field: &ScalarField<T>, t: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(20 + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

pub fn decode_snapshot<T: Real>(bytes: &[u8], origin: &str) -> Result<(ScalarField<T>, f64)> {
    let bad = |reason: &str| Error::Snapshot {
        path: origin.to_string(),
        reason: reason.to_string(),
    };
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(bad("missing VPMF header"));
    }
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let t = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let grid = TorusGrid::new(d, n).map_err(|e| bad(&e.to_string()))?;
    let body = &bytes[20..];
    if body.len() != 8 * grid.len() {
        return Err(bad(&format!("expected {} values, found {} bytes", grid.len(), body.len())));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let field = ScalarField::new(grid, values).map_err(|e| bad(&e.to_string()))?;
    Ok((field, t))
}

/// Writes `bytes` to a temp file in the target directory, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_snapshot<T: Real>(path: &Path, field: &ScalarField<T>, t: f64) -> Result<()> {
    write_atomic(path, &encode_snapshot(field, t))
}

pub fn read_snapshot<T: Real>(path: &Path) -> Result<(ScalarField<T>, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot(&bytes, &path.display().to_string())
}
