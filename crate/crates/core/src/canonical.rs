//! Canonical transformation of a measurement.
//!
//! `F_{s,D} = s diag(exp(-2 pi i D / lambda_1), ..., exp(-2 pi i D / lambda_m))`
//! rescales a measurement and shifts every path distance by `-D`. With
//! `s = 1 / |v|` and `D = lambda_k arg(v_k) / 2 pi` the result has unit norm
//! and a real, nonnegative `k`-th component, which is then fully determined by
//! the others: `rho_k = sqrt(1 - sum_{k' != k} |rho_k'|^2)`. Dropping it leaves
//! `2m - 2` real coordinates.
//!
//! Applying the same `F` to the dictionary only relabels its columns from `d`
//! to `d - D`. Since `0 <= D < lambda_k`, one dictionary over
//! `[d_min - lambda_k, d_max]` serves every canonical measurement.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Result, SraError};
use crate::measurement::{DictionaryMatrix, DistanceGrid, FrequencyConfig, MeasurementVector};

/// Reduced coordinates are `(Re rho_k', Im rho_k')` pairs for every `k' != k`
/// in increasing order of `k'`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub reduced: Vec<f64>,
    pub k: usize,
    /// Applied shift in cm, in `[0, lambda_k)`.
    pub delta: f64,
    /// Applied scale `1 / |v|_2`.
    pub scale: f64,
}

impl CanonicalForm {
    pub fn m(&self) -> usize {
        self.reduced.len() / 2 + 1
    }

    pub fn reduced_energy(&self) -> f64 {
        self.reduced.iter().map(|a| a * a).sum()
    }
}

pub fn f_transform(v: &MeasurementVector, s: f64, delta: f64, freq: &FrequencyConfig) -> MeasurementVector {
    let rotated: Vec<Complex64> = (0..v.m())
        .map(|k| v.component(k) * Complex64::from_polar(s, -TAU * delta / freq.half_wavelength(k)))
        .collect();
    MeasurementVector::from_complex(&rotated)
}

/// Materializes `F_{s,D} Phi`; column `j` then models distance `d_j - D`.
pub fn f_transform_dictionary(phi: &DictionaryMatrix, s: f64, delta: f64) -> DictionaryMatrix {
    let (m, n) = (phi.freq().m(), phi.cols());
    let mut entries = phi.entries().to_vec();
    for k in 0..m {
        let rot = Complex64::from_polar(s, -TAU * delta / phi.freq().half_wavelength(k));
        for j in 0..n {
            let z = Complex64::new(phi.get(k, j), phi.get(k + m, j)) * rot;
            entries[k * n + j] = z.re;
            entries[(k + m) * n + j] = z.im;
        }
    }
    DictionaryMatrix::from_parts(entries, *phi.grid(), phi.freq().clone())
}

/// Phase in `[0, 2 pi)`.
pub(crate) fn phase(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

pub fn to_canonical(v: &MeasurementVector, k: usize, freq: &FrequencyConfig) -> Result<CanonicalForm> {
    if v.m() != freq.m() || k >= freq.m() {
        return Err(SraError::Dimension { expected: freq.m(), actual: v.m() });
    }
    let norm = v.l2_norm();
    let vk = v.component(k);
    if norm == 0.0 || vk.norm() == 0.0 {
        return Err(SraError::ZeroMeasurement);
    }
    let scale = 1.0 / norm;
    let delta = freq.half_wavelength(k) * phase(vk) / TAU;
    let rho = f_transform(v, scale, delta, freq);
    let mut reduced = Vec::with_capacity(2 * v.m() - 2);
    for kk in (0..v.m()).filter(|kk| *kk != k) {
        let z = rho.component(kk);
        reduced.push(z.re);
        reduced.push(z.im);
    }
    Ok(CanonicalForm { reduced, k, delta, scale })
}

/// Rebuilds the unit-norm, phase-aligned measurement `rho`.
pub fn from_canonical(c: &CanonicalForm) -> Result<MeasurementVector> {
    let energy = c.reduced_energy();
    if energy > 1.0 + 1e-9 {
        return Err(SraError::CorruptCanonical(energy));
    }
    let m = c.m();
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    z[c.k] = Complex64::new((1.0 - energy).max(0.0).sqrt(), 0.0);
    let others = (0..m).filter(|kk| *kk != c.k);
    for (pair, kk) in c.reduced.chunks_exact(2).zip(others) {
        z[kk] = Complex64::new(pair[0], pair[1]);
    }
    Ok(MeasurementVector::from_complex(&z))
}

pub fn extend_grid(grid: &DistanceGrid, freq: &FrequencyConfig, k: usize) -> Result<DistanceGrid> {
    DistanceGrid::new(grid.d_min() - freq.half_wavelength(k), grid.d_max(), grid.step())
}
