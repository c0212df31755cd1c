//! Lookup table over canonical coordinates.
//!
//! Every nonzero measurement canonicalizes to a point of the `2m - 2`
//! dimensional unit ball, and its SRA depth is the depth of that point on the
//! extended grid plus the shift `D`. The table discretizes `[-1, 1]` into `L`
//! cells per coordinate, solves once per cell and answers queries by
//! nearest-center lookup.
//!
//! A cell is reachable when its box meets the unit ball. Reachable cells whose
//! center lies outside the ball are solved at the center's radial projection
//! onto the sphere; all other cells are invalid.

use std::io::Write;
use std::ops::Range;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::canonical::{extend_grid, from_canonical, phase, CanonicalForm};
use crate::depth::DepthEstimate;
use crate::error::{Result, SraError};
use crate::exec::Executor;
use crate::frame::{DepthMap, Frame};
use crate::measurement::{build_phi, DictionaryMatrix, DistanceGrid, FrequencyConfig, MeasurementVector};
use crate::pipeline::{DepthPipeline, PipelineConfig};

pub const MAGIC: &[u8; 8] = b"SRALUT\0\0";
pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_CELLS_PER_DIM: usize = 32;
/// Largest supported number of frequencies.
pub const MAX_M: usize = 8;
const MAX_CELLS: usize = 1 << 31;
const CELL_BYTES: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct LutConfig {
    pub cells_per_dim: usize,
    /// Reference frequency index of the canonical form.
    pub k: usize,
    pub freq: FrequencyConfig,
    /// Physical grid; the table itself is solved on its extension.
    pub grid: DistanceGrid,
    pub pipeline: PipelineConfig,
}

impl Default for LutConfig {
    fn default() -> Self {
        let freq = FrequencyConfig::default();
        LutConfig {
            cells_per_dim: DEFAULT_CELLS_PER_DIM,
            k: freq.shortest(),
            freq,
            grid: DistanceGrid::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl LutConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.freq.m();
        if !(2..=MAX_M).contains(&m) {
            return Err(SraError::Config(format!("lookup tables support 2..={MAX_M} frequencies, got {m}")));
        }
        if self.cells_per_dim < 2 {
            return Err(SraError::Config("at least 2 cells per dimension are required".into()));
        }
        if self.k >= m {
            return Err(SraError::Config(format!("reference index {} out of range for m = {m}", self.k)));
        }
        self.cell_count()?;
        Ok(())
    }

    pub fn dims(&self) -> usize {
        2 * self.freq.m() - 2
    }

    pub fn cell_count(&self) -> Result<usize> {
        u32::try_from(self.dims())
            .ok()
            .and_then(|d| self.cells_per_dim.checked_pow(d))
            .filter(|&n| n <= MAX_CELLS)
            .ok_or(SraError::GridTooLarge(usize::MAX))
    }

    pub fn extended_grid(&self) -> Result<DistanceGrid> {
        extend_grid(&self.grid, &self.freq, self.k)
    }

    pub fn dictionary(&self) -> Result<DictionaryMatrix> {
        Ok(build_phi(&self.extended_grid()?, &self.freq))
    }

    fn cell_width(&self) -> f64 {
        2.0 / self.cells_per_dim as f64
    }

    /// Coordinate of the center of cell `q` along one dimension.
    pub fn center(&self, q: usize) -> f64 {
        -1.0 + (q as f64 + 0.5) * self.cell_width()
    }

    pub fn quantize(&self, c: f64) -> usize {
        let l = self.cells_per_dim;
        let t = (c + 1.0) * (l as f64 / 2.0);
        // truncation is floor for t > 0; NaN also maps to 0
        if t > 0.0 {
            (t as usize).min(l - 1)
        } else {
            0
        }
    }

    /// Per-dimension cell indices of a flat index, most significant first.
    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut q = vec![0; self.dims()];
        for slot in q.iter_mut().rev() {
            *slot = index % self.cells_per_dim;
            index /= self.cells_per_dim;
        }
        q
    }

    /// Point solved for a cell, or `None` when the cell misses the unit ball.
    pub fn solve_point(&self, index: usize) -> Option<Vec<f64>> {
        let half = self.cell_width() / 2.0;
        let center: Vec<f64> = self.unflatten(index).into_iter().map(|q| self.center(q)).collect();
        let nearest: f64 = center.iter().map(|&c| (c.abs() - half).max(0.0).powi(2)).sum();
        if nearest > 1.0 {
            return None;
        }
        let r2: f64 = center.iter().map(|c| c * c).sum();
        if r2 <= 1.0 {
            Some(center)
        } else {
            let s = 1.0 / r2.sqrt();
            Some(center.into_iter().map(|c| c * s).collect())
        }
    }

    pub fn reachable_count(&self) -> Result<usize> {
        Ok((0..self.cell_count()?).filter(|&i| self.solve_point(i).is_some()).count())
    }

    /// SHA-256 over the configuration and the extended dictionary.
    pub fn fingerprint(&self, phi_ext: &DictionaryMatrix) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"sra-lut");
        h.update(FORMAT_VERSION.to_le_bytes());
        h.update(header_bytes(self));
        for e in phi_ext.entries() {
            h.update(e.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Configuration part of the file header.
fn header_bytes(cfg: &LutConfig) -> Vec<u8> {
    let mut b = Vec::new();
    for x in [cfg.freq.m(), cfg.cells_per_dim, cfg.k] {
        b.extend_from_slice(&(x as u32).to_le_bytes());
    }
    let mut floats = vec![cfg.grid.d_min(), cfg.grid.d_max(), cfg.grid.step()];
    floats.extend_from_slice(cfg.freq.frequencies());
    let p = &cfg.pipeline;
    floats.extend_from_slice(&[p.epsilon, p.sigma, p.rel_threshold, p.confidence]);
    for f in floats {
        b.extend_from_slice(&f.to_le_bytes());
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LutCell {
    /// Depth in the canonical domain, in cm; 0 for invalid cells.
    pub depth: f32,
    pub confidence: f32,
    pub valid: bool,
}

impl LutCell {
    pub const INVALID: LutCell = LutCell { depth: 0.0, confidence: 0.0, valid: false };
}

/// Solves cells `range` of the table defined by `cfg`.
pub fn build_cells(
    cfg: &LutConfig,
    phi_ext: &DictionaryMatrix,
    range: Range<usize>,
    exec: &Executor,
) -> Result<Vec<LutCell>> {
    cfg.validate()?;
    check_dictionary(cfg, phi_ext)?;
    let total = cfg.cell_count()?;
    if range.start > range.end || range.end > total {
        return Err(SraError::Config(format!("cell range {range:?} outside 0..{total}")));
    }
    let pipeline = DepthPipeline::new(phi_ext.clone(), cfg.pipeline.clone())?;
    let start = range.start;
    Ok(exec.map(range.len(), |i| build_cell(cfg, &pipeline, start + i)))
}

fn build_cell(cfg: &LutConfig, pipeline: &DepthPipeline, index: usize) -> LutCell {
    let Some(reduced) = cfg.solve_point(index) else {
        return LutCell::INVALID;
    };
    let form = CanonicalForm { reduced, k: cfg.k, delta: 0.0, scale: 1.0 };
    let Ok(rho) = from_canonical(&form) else {
        return LutCell::INVALID;
    };
    let d = pipeline.depth(&rho);
    LutCell {
        depth: if d.valid { d.depth as f32 } else { 0.0 },
        confidence: d.confidence as f32,
        valid: d.valid,
    }
}

fn check_dictionary(cfg: &LutConfig, phi_ext: &DictionaryMatrix) -> Result<()> {
    if *phi_ext.grid() != cfg.extended_grid()? || *phi_ext.freq() != cfg.freq {
        return Err(SraError::Config("dictionary does not match the extended grid of the configuration".into()));
    }
    Ok(())
}

pub fn build_lut(cfg: &LutConfig, phi_ext: &DictionaryMatrix, exec: &Executor) -> Result<Lut> {
    let total = cfg.cell_count()?;
    let started = Instant::now();
    let cells = build_cells(cfg, phi_ext, 0..total, exec)?;
    log::info!("built {total} cells in {:.1} s", started.elapsed().as_secs_f64());
    Lut::from_cells(cfg.clone(), phi_ext, cells)
}

#[derive(Debug, Clone)]
pub struct Lut {
    config: LutConfig,
    fingerprint: [u8; 32],
    cells: Vec<LutCell>,
    query: QueryParams,
}

/// Values the per-pixel path needs, precomputed.
#[derive(Debug, Clone)]
struct QueryParams {
    m: usize,
    k: usize,
    lambda_k: f64,
    rotation: Rotation,
    d_min: f64,
}

/// Per-component phase rotation `exp(-i phi lambda_k / lambda_kk)` of the
/// canonical shift, where `phi` is the phase of the reference component.
#[derive(Debug, Clone)]
enum Rotation {
    /// All ratios are small integer multiples `p_kk` of `base`: one `sin_cos`
    /// and complex powers.
    Harmonic { base: f64, powers: Vec<u32> },
    PerComponent { ratios: Vec<f64> },
}

impl Rotation {
    const MAX_MULTIPLE: u32 = 64;

    fn new(freq: &FrequencyConfig, k: usize) -> Self {
        let lk = freq.half_wavelength(k);
        let ratios: Vec<f64> = (0..freq.m()).filter(|&kk| kk != k).map(|kk| lk / freq.half_wavelength(kk)).collect();
        for q in 1..=Self::MAX_MULTIPLE {
            let n: Vec<f64> = ratios.iter().map(|r| r * q as f64).collect();
            if n.iter().all(|x| x.round() >= 1.0 && (x - x.round()).abs() < 1e-9 * x.max(1.0)) {
                let n: Vec<u32> = n.iter().map(|x| x.round() as u32).collect();
                let g = n.iter().fold(0, |a, &b| gcd(a, b));
                if n.iter().all(|&x| x / g <= Self::MAX_MULTIPLE) {
                    return Rotation::Harmonic { base: g as f64 / q as f64, powers: n.iter().map(|x| x / g).collect() };
                }
            }
        }
        Rotation::PerComponent { ratios }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub canonicalize: Duration,
    pub quantize: Duration,
    pub fetch: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.canonicalize + self.quantize + self.fetch
    }
}

impl Lut {
    pub fn from_cells(config: LutConfig, phi_ext: &DictionaryMatrix, cells: Vec<LutCell>) -> Result<Self> {
        config.validate()?;
        check_dictionary(&config, phi_ext)?;
        let expected = config.cell_count()?;
        if cells.len() != expected {
            return Err(SraError::Dimension { expected, actual: cells.len() });
        }
        let fingerprint = config.fingerprint(phi_ext);
        let query = QueryParams {
            m: config.freq.m(),
            k: config.k,
            lambda_k: config.freq.half_wavelength(config.k),
            rotation: Rotation::new(&config.freq, config.k),
            d_min: config.grid.d_min(),
        };
        Ok(Lut { config, fingerprint, cells, query })
    }

    pub fn config(&self) -> &LutConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn cells(&self) -> &[LutCell] {
        &self.cells
    }

    /// Canonical reduced coordinates and shift of a stacked real measurement;
    /// `None` when the reference component vanishes.
    #[inline]
    fn canonicalize(&self, re: &[f64], reduced: &mut [f64]) -> Option<f64> {
        let QueryParams { m, k, lambda_k, .. } = self.query;
        let norm = re.iter().map(|a| a * a).sum::<f64>().sqrt();
        let vk = Complex64::new(re[k], re[k + m]);
        if norm == 0.0 || (vk.re == 0.0 && vk.im == 0.0) {
            return None;
        }
        let scale = 1.0 / norm;
        let phi = phase(vk);
        let mut slot = 0;
        let mut put = |kk: usize, rot: Complex64| {
            let z = Complex64::new(re[kk], re[kk + m]) * rot;
            reduced[slot] = z.re;
            reduced[slot + 1] = z.im;
            slot += 2;
        };
        match &self.query.rotation {
            Rotation::Harmonic { base, powers } => {
                let (sin, cos) = (phi * base).sin_cos();
                let unit = Complex64::new(cos, -sin);
                for (kk, &p) in (0..m).filter(|&kk| kk != k).zip(powers) {
                    put(kk, unit.powu(p) * scale);
                }
            }
            Rotation::PerComponent { ratios } => {
                for (kk, r) in (0..m).filter(|&kk| kk != k).zip(ratios) {
                    put(kk, Complex64::from_polar(scale, -phi * r));
                }
            }
        }
        Some(lambda_k * phi / std::f64::consts::TAU)
    }

    #[inline]
    fn cell_index(&self, reduced: &[f64]) -> usize {
        reduced.iter().fold(0, |idx, &c| idx * self.config.cells_per_dim + self.config.quantize(c))
    }

    #[inline]
    fn resolve(&self, index: usize, delta: f64) -> DepthEstimate {
        let cell = self.cells[index];
        let depth = cell.depth as f64 + delta;
        if !cell.valid || depth < self.query.d_min {
            return DepthEstimate { confidence: cell.confidence as f64, ..DepthEstimate::invalid() };
        }
        DepthEstimate { depth, valid: true, confidence: cell.confidence as f64, peak_index: None }
    }

    #[inline]
    fn query_real(&self, re: &[f64]) -> DepthEstimate {
        let mut reduced = [0.0; 2 * MAX_M - 2];
        let reduced = &mut reduced[..2 * self.query.m - 2];
        match self.canonicalize(re, reduced) {
            Some(delta) => self.resolve(self.cell_index(reduced), delta),
            None => DepthEstimate::invalid(),
        }
    }

    /// Flat index of the cell `v` falls into, with its shift `D`.
    pub fn locate(&self, v: &MeasurementVector) -> Result<(usize, f64)> {
        self.check_m(v.m())?;
        let mut reduced = vec![0.0; self.config.dims()];
        let delta = self.canonicalize(v.real_view(), &mut reduced).ok_or(SraError::ZeroMeasurement)?;
        Ok((self.cell_index(&reduced), delta))
    }

    pub fn query(&self, v: &MeasurementVector) -> DepthEstimate {
        if v.m() != self.query.m {
            return DepthEstimate::invalid();
        }
        self.query_real(v.real_view())
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m != self.query.m {
            return Err(SraError::Dimension { expected: self.query.m, actual: m });
        }
        Ok(())
    }

    #[inline]
    fn query_pixel(&self, px: &[f32]) -> f32 {
        let mut re = [0.0; 2 * MAX_M];
        let re = &mut re[..px.len()];
        for (r, &p) in re.iter_mut().zip(px) {
            *r = p as f64;
        }
        let d = self.query_real(re);
        if d.valid {
            d.depth as f32
        } else {
            f32::NAN
        }
    }

    /// Per-pixel lookup; identical output for every executor.
    pub fn process_frame(&self, frame: &Frame, exec: &Executor) -> Result<DepthMap> {
        self.check_m(frame.m())?;
        let mut depth = vec![0.0f32; frame.pixels()];
        let chunk = frame.width().max(1) * 8;
        exec.for_each_chunk(&mut depth, chunk, |offset, out| {
            for (i, d) in out.iter_mut().enumerate() {
                *d = self.query_pixel(frame.pixel(offset + i));
            }
        });
        let valid = depth.iter().map(|d| !d.is_nan()).collect();
        Ok(DepthMap { width: frame.width(), height: frame.height(), depth, valid })
    }

    /// Sequential [`Lut::process_frame`] with the three stages timed separately.
    pub fn process_frame_staged(&self, frame: &Frame) -> Result<(DepthMap, StageTimings)> {
        self.check_m(frame.m())?;
        let dims = self.config.dims();
        let n = frame.pixels();
        let mut reduced = vec![0.0; n * dims];
        let mut deltas = vec![f64::NAN; n];
        let mut re = vec![0.0; 2 * self.query.m];

        let t = Instant::now();
        for i in 0..n {
            for (r, &p) in re.iter_mut().zip(frame.pixel(i)) {
                *r = p as f64;
            }
            if let Some(d) = self.canonicalize(&re, &mut reduced[i * dims..(i + 1) * dims]) {
                deltas[i] = d;
            }
        }
        let canonicalize = t.elapsed();

        let t = Instant::now();
        let indices: Vec<usize> = (0..n)
            .map(|i| if deltas[i].is_nan() { usize::MAX } else { self.cell_index(&reduced[i * dims..(i + 1) * dims]) })
            .collect();
        let quantize = t.elapsed();

        let t = Instant::now();
        let depth: Vec<f32> = indices
            .iter()
            .zip(&deltas)
            .map(|(&idx, &delta)| {
                if idx == usize::MAX {
                    return f32::NAN;
                }
                let d = self.resolve(idx, delta);
                if d.valid {
                    d.depth as f32
                } else {
                    f32::NAN
                }
            })
            .collect();
        let fetch = t.elapsed();

        let valid = depth.iter().map(|d| !d.is_nan()).collect();
        let map = DepthMap { width: frame.width(), height: frame.height(), depth, valid };
        Ok((map, StageTimings { canonicalize, quantize, fetch }))
    }

    /// Half the sum over dimensions of the `quantile` of absolute depth
    /// differences between adjacent valid cells: a point is at most half a
    /// cell from its center along every axis.
    pub fn quantization_bound(&self, quantile: f64) -> f64 {
        let l = self.config.cells_per_dim;
        let dims = self.config.dims();
        let mut total = 0.0;
        for d in 0..dims {
            let stride = l.pow((dims - 1 - d) as u32);
            let mut diffs = Vec::new();
            for (i, a) in self.cells.iter().enumerate() {
                if (i / stride) % l == l - 1 {
                    continue;
                }
                let b = &self.cells[i + stride];
                if a.valid && b.valid {
                    diffs.push((a.depth - b.depth).abs() as f64);
                }
            }
            if diffs.is_empty() {
                continue;
            }
            diffs.sort_by(f64::total_cmp);
            let pos = ((diffs.len() - 1) as f64 * quantile.clamp(0.0, 1.0)).round() as usize;
            total += diffs[pos];
        }
        0.5 * total
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(128 + self.cells.len() * CELL_BYTES);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        b.extend_from_slice(&header_bytes(&self.config));
        b.extend_from_slice(&self.fingerprint);
        b.extend_from_slice(&(self.cells.len() as u64).to_le_bytes());
        for c in &self.cells {
            b.extend_from_slice(&c.depth.to_le_bytes());
            b.extend_from_slice(&c.confidence.to_le_bytes());
            b.push(c.valid as u8);
        }
        b
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    /// Parses a table and checks its fingerprint against the stored configuration.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(SraError::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(SraError::Format(format!("unsupported version {version}")));
        }
        let m = r.u32()? as usize;
        let cells_per_dim = r.u32()? as usize;
        let k = r.u32()? as usize;
        if m == 0 || m > MAX_M {
            return Err(SraError::Format(format!("unsupported m = {m}")));
        }
        let grid = DistanceGrid::new(r.f64()?, r.f64()?, r.f64()?)?;
        let freqs = (0..m).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let pipeline = PipelineConfig { epsilon: r.f64()?, sigma: r.f64()?, rel_threshold: r.f64()?, confidence: r.f64()? };
        let config = LutConfig { cells_per_dim, k, freq: FrequencyConfig::new(freqs)?, grid, pipeline };
        config.validate()?;
        let stored: [u8; 32] = r.take(32)?.try_into().unwrap();
        let count = r.u64()? as usize;
        if count != config.cell_count()? {
            return Err(SraError::Format(format!("cell count {count} does not match the header")));
        }
        let payload = r.take(count.checked_mul(CELL_BYTES).ok_or_else(|| SraError::Format("cell count overflow".into()))?)?;
        if r.pos != bytes.len() {
            return Err(SraError::Format("trailing bytes".into()));
        }
        let mut cells = Vec::with_capacity(count);
        for c in payload.chunks_exact(CELL_BYTES) {
            let valid = match c[8] {
                0 => false,
                1 => true,
                x => return Err(SraError::Format(format!("bad validity byte {x}"))),
            };
            cells.push(LutCell {
                depth: f32::from_le_bytes(c[0..4].try_into().unwrap()),
                confidence: f32::from_le_bytes(c[4..8].try_into().unwrap()),
                valid,
            });
        }
        let phi = config.dictionary()?;
        let lut = Lut::from_cells(config, &phi, cells)?;
        if lut.fingerprint != stored {
            return Err(SraError::Fingerprint);
        }
        Ok(lut)
    }

    /// Like [`Lut::from_bytes`], refusing tables built for another configuration.
    pub fn from_bytes_expecting(bytes: &[u8], expected: &LutConfig) -> Result<Self> {
        let lut = Lut::from_bytes(bytes)?;
        if lut.fingerprint != expected.fingerprint(&expected.dictionary()?) {
            return Err(SraError::Fingerprint);
        }
        Ok(lut)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| SraError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Direct equivalent of a table query: canonicalize, solve on the extended
/// grid without quantization, shift back.
pub fn direct_depth(pipeline: &DepthPipeline, v: &MeasurementVector, k: usize, d_min: f64) -> DepthEstimate {
    let Ok(form) = crate::canonical::to_canonical(v, k, pipeline.phi().freq()) else {
        return DepthEstimate::invalid();
    };
    let Ok(rho) = from_canonical(&form) else {
        return DepthEstimate::invalid();
    };
    let d = pipeline.depth(&rho).shifted(form.delta);
    if d.valid && d.depth < d_min {
        return DepthEstimate { confidence: d.confidence, ..DepthEstimate::invalid() };
    }
    d
}
