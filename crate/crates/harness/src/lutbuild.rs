//! Resumable table builds.
//!
//! Cells are solved in fixed ranges of `chunk_cells`. Each finished range is
//! written to `<out>.parts/<start>.chunk` as
//!
//! ```text
//! b"SRACHUNK" | fingerprint [u8; 32] | start u64 | count u64 | count x (depth f32, confidence f32, valid u8)
//! ```
//!
//! (little endian), via a temporary file and a rename. A rerun skips every
//! range whose chunk file matches the fingerprint, then assembles the table,
//! writes it to `<out>` and removes the parts directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use sra_core::exec::Executor;
use sra_core::lut::{build_cells, Lut, LutCell, LutConfig};

use crate::error::{HarnessError, Result};

const CHUNK_MAGIC: &[u8; 8] = b"SRACHUNK";
const CELL_BYTES: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub cells: usize,
    pub reachable: usize,
    pub valid: usize,
    pub chunks_built: usize,
    pub chunks_reused: usize,
}

fn io_err(p: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(p.display().to_string(), e)
}

pub fn parts_dir(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".parts");
    out.with_file_name(name)
}

fn encode_chunk(fingerprint: &[u8; 32], start: usize, cells: &[LutCell]) -> Vec<u8> {
    let mut b = Vec::with_capacity(56 + cells.len() * CELL_BYTES);
    b.extend_from_slice(CHUNK_MAGIC);
    b.extend_from_slice(fingerprint);
    b.extend_from_slice(&(start as u64).to_le_bytes());
    b.extend_from_slice(&(cells.len() as u64).to_le_bytes());
    for c in cells {
        b.extend_from_slice(&c.depth.to_le_bytes());
        b.extend_from_slice(&c.confidence.to_le_bytes());
        b.push(c.valid as u8);
    }
    b
}

/// Cells of a chunk file, or `None` if it belongs to another build or is damaged.
fn decode_chunk(bytes: &[u8], fingerprint: &[u8; 32], start: usize, count: usize) -> Option<Vec<LutCell>> {
    if bytes.len() != 56 + count * CELL_BYTES || &bytes[..8] != CHUNK_MAGIC || &bytes[8..40] != fingerprint {
        return None;
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
    if word(40) != start || word(48) != count {
        return None;
    }
    bytes[56..]
        .chunks_exact(CELL_BYTES)
        .map(|c| {
            let valid = match c[8] {
                0 => false,
                1 => true,
                _ => return None,
            };
            Some(LutCell {
                depth: f32::from_le_bytes(c[0..4].try_into().unwrap()),
                confidence: f32::from_le_bytes(c[4..8].try_into().unwrap()),
                valid,
            })
        })
        .collect()
}

/// Builds (or finishes building) the table for `cfg` and writes it to `out`.
pub fn build_resumable(cfg: &LutConfig, out: &Path, chunk_cells: usize, exec: &Executor) -> Result<(Lut, BuildReport)> {
    cfg.validate()?;
    let phi = cfg.dictionary()?;
    let fingerprint = cfg.fingerprint(&phi);
    let total = cfg.cell_count()?;
    let reachable = cfg.reachable_count()?;
    log::info!("{total} cells, {reachable} reachable (inside the unit ball up to one cell)");

    let parts = parts_dir(out);
    std::fs::create_dir_all(&parts).map_err(io_err(&parts))?;
    let chunk_cells = chunk_cells.max(1);
    let mut cells = Vec::with_capacity(total);
    let (mut built, mut reused) = (0, 0);
    let started = Instant::now();
    for start in (0..total).step_by(chunk_cells) {
        let end = (start + chunk_cells).min(total);
        let path = parts.join(format!("{start:010}.chunk"));
        if let Some(done) = std::fs::read(&path).ok().and_then(|b| decode_chunk(&b, &fingerprint, start, end - start)) {
            cells.extend(done);
            reused += 1;
            continue;
        }
        let chunk = build_cells(cfg, &phi, start..end, exec)?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, encode_chunk(&fingerprint, start, &chunk)).map_err(io_err(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(io_err(&path))?;
        cells.extend(chunk);
        built += 1;
        log::info!("cells {end}/{total} after {:.1} s", started.elapsed().as_secs_f64());
    }

    let valid = cells.iter().filter(|c| c.valid).count();
    let lut = Lut::from_cells(cfg.clone(), &phi, cells)?;
    let tmp = out.with_extension("tmp");
    std::fs::write(&tmp, lut.to_bytes()).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, out).map_err(io_err(out))?;
    std::fs::remove_dir_all(&parts).map_err(io_err(&parts))?;
    log::info!("wrote {} ({valid} valid cells)", out.display());
    let report = BuildReport { cells: total, reachable, valid, chunks_built: built, chunks_reused: reused };
    Ok((lut, report))
}

pub fn load(path: &Path) -> Result<Lut> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(Lut::from_bytes(&bytes)?)
}
