//! Raw multi-frequency frames and depth maps.
//!
//! A frame file is a header of three little-endian `u32` values (width,
//! height, m) followed by `2m` little-endian `f32` values per pixel in
//! row-major pixel order. Each pixel's values are laid out like
//! [`MeasurementVector::real_view`]: the `m` real parts, then the `m`
//! imaginary parts.

use std::io::{Read, Write};

use crate::error::{Result, SraError};
use crate::measurement::MeasurementVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    m: usize,
    data: Vec<f32>,
}

impl Frame {
    pub fn new(width: usize, height: usize, m: usize, data: Vec<f32>) -> Result<Self> {
        let expected = width * height * 2 * m;
        if data.len() != expected {
            return Err(SraError::Dimension { expected, actual: data.len() });
        }
        if m == 0 {
            return Err(SraError::Config("frame needs at least one frequency".into()));
        }
        Ok(Frame { width, height, m, data })
    }

    /// Builds a frame pixel by pixel; `f(x, y)` must return `2m` values.
    pub fn from_fn(width: usize, height: usize, m: usize, mut f: impl FnMut(usize, usize) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 2 * m);
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                if px.len() != 2 * m {
                    return Err(SraError::Dimension { expected: 2 * m, actual: px.len() });
                }
                data.extend(px.iter().map(|&a| a as f32));
            }
        }
        Frame::new(width, height, m, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, i: usize) -> &[f32] {
        let w = 2 * self.m;
        &self.data[i * w..(i + 1) * w]
    }

    pub fn measurement(&self, i: usize) -> MeasurementVector {
        MeasurementVector::from_real(self.pixel(i).iter().map(|&a| a as f64).collect())
            .expect("pixel width is 2m")
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for h in [self.width, self.height, self.m] {
            w.write_all(&header_u32(h)?.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for a in &self.data {
            buf.extend_from_slice(&a.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 12];
        r.read_exact(&mut head).map_err(|e| SraError::Format(format!("frame header: {e}")))?;
        let field = |i: usize| u32::from_le_bytes(head[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        let (width, height, m) = (field(0), field(1), field(2));
        let count = width
            .checked_mul(height)
            .and_then(|p| p.checked_mul(2 * m))
            .ok_or_else(|| SraError::Format("frame dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != count * 4 {
            return Err(SraError::Format(format!("expected {} payload bytes, found {}", count * 4, bytes.len())));
        }
        let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        Frame::new(width, height, m, data)
    }
}

fn header_u32(x: usize) -> Result<u32> {
    u32::try_from(x).map_err(|_| SraError::Format(format!("{x} does not fit a u32 header field")))
}

/// Per-pixel depth in cm, NaN where invalid.
#[derive(Debug, Clone)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f32>,
    pub valid: Vec<bool>,
}

impl DepthMap {
    pub fn valid_fraction(&self) -> f64 {
        if self.valid.is_empty() {
            return 0.0;
        }
        self.valid.iter().filter(|v| **v).count() as f64 / self.valid.len() as f64
    }

    /// Bitwise comparison, so NaN entries compare equal to themselves.
    pub fn bit_identical(&self, other: &DepthMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.valid == other.valid
            && self.depth.iter().map(|d| d.to_bits()).eq(other.depth.iter().map(|d| d.to_bits()))
    }

    /// Header (width, height) as `u32`, then one `f32` depth per pixel.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&header_u32(self.width)?.to_le_bytes())?;
        w.write_all(&header_u32(self.height)?.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.depth.len() * 4);
        for d in &self.depth {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }
}
