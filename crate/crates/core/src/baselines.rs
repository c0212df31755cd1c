//! Competing depth estimators: exhaustive two-path maximum likelihood and the
//! best single path.
//!
//! Both fit nonnegative amplitudes by weighted least squares on `W Phi`, with
//! `W = C^{-1/2}` (unit weights for a zero covariance). Per-pixel work only
//! needs the correlations `Phi_w^T W v`; the Gram matrix of the weighted
//! columns is computed once per dictionary.

use crate::depth::DepthEstimate;
use crate::error::{Result, SraError};
use crate::measurement::{DictionaryMatrix, MeasurementVector, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPathFit {
    pub d1: f64,
    pub d2: f64,
    pub x1: f64,
    pub x2: f64,
    pub i: usize,
    pub j: usize,
    /// Weighted residual `|W (Phi x - v)|_2`.
    pub residual: f64,
}

impl TwoPathFit {
    /// Distance of the nearest path with a positive amplitude.
    pub fn depth(&self) -> f64 {
        if self.x1 > 0.0 || self.x2 <= 0.0 {
            self.d1
        } else {
            self.d2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleFit {
    pub index: usize,
    pub distance: f64,
    pub amplitude: f64,
    pub residual: f64,
}

/// Precomputed weighted dictionary for both baselines.
#[derive(Debug, Clone)]
pub struct Baselines {
    phi: DictionaryMatrix,
    weights: Vec<f64>,
    /// Row-major `n x n` Gram matrix of the weighted columns.
    gram: Vec<f64>,
}

impl Baselines {
    pub fn new(phi: &DictionaryMatrix, noise: &NoiseModel) -> Result<Self> {
        if noise.m() * 2 != phi.rows() {
            return Err(SraError::Dimension { expected: phi.rows() / 2, actual: noise.m() });
        }
        let weights = if noise.variances().iter().all(|&s| s == 0.0) {
            vec![1.0; phi.rows()]
        } else {
            noise.inv_sqrt()?
        };
        let n = phi.cols();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| phi.column(j).iter().zip(&weights).map(|(a, w)| a * w).collect())
            .collect();
        let mut gram = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let g: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                gram[a * n + b] = g;
                gram[b * n + a] = g;
            }
        }
        Ok(Baselines { phi: phi.clone(), weights, gram })
    }

    fn correlations(&self, v: &MeasurementVector) -> Result<(Vec<f64>, f64)> {
        if v.real_view().len() != self.phi.rows() {
            return Err(SraError::Dimension { expected: self.phi.rows() / 2, actual: v.m() });
        }
        if v.is_zero() {
            return Err(SraError::ZeroMeasurement);
        }
        let y: Vec<f64> = v.real_view().iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        let yy = y.iter().map(|a| a * a).sum();
        let c = (0..self.phi.cols())
            .map(|j| (0..self.phi.rows()).map(|r| self.phi.get(r, j) * self.weights[r] * y[r]).sum())
            .collect();
        Ok((c, yy))
    }

    fn g(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.phi.cols() + b]
    }

    /// Squared residual of the best nonnegative fit on column `j` alone.
    fn single(&self, c: &[f64], yy: f64, j: usize) -> (f64, f64) {
        let x = (c[j] / self.g(j, j)).max(0.0);
        (x, yy - x * c[j])
    }

    /// Best nonnegative fit over every column pair `i < j`; ties keep the
    /// first pair in lexicographic order.
    pub fn ml_two_path(&self, v: &MeasurementVector) -> Result<TwoPathFit> {
        let n = self.phi.cols();
        if n < 2 {
            return Err(SraError::Config("two-path search needs at least two grid points".into()));
        }
        let (c, yy) = self.correlations(v)?;
        let singles: Vec<(f64, f64)> = (0..n).map(|j| self.single(&c, yy, j)).collect();
        let mut best = (f64::INFINITY, 0, 1, 0.0, 0.0);
        for i in 0..n {
            let gii = self.g(i, i);
            for j in i + 1..n {
                let (gjj, gij) = (self.g(j, j), self.g(i, j));
                let det = gii * gjj - gij * gij;
                let mut cand = None;
                if det > 1e-12 * gii * gjj {
                    let xi = (gjj * c[i] - gij * c[j]) / det;
                    let xj = (gii * c[j] - gij * c[i]) / det;
                    if xi >= 0.0 && xj >= 0.0 {
                        cand = Some((yy - xi * c[i] - xj * c[j], xi, xj));
                    }
                }
                // an active bound leaves one column (or none)
                let (r, xi, xj) = cand.unwrap_or_else(|| {
                    let (xi, ri) = singles[i];
                    let (xj, rj) = singles[j];
                    if ri <= rj {
                        (ri, xi, 0.0)
                    } else {
                        (rj, 0.0, xj)
                    }
                });
                if r < best.0 {
                    best = (r, i, j, xi, xj);
                }
            }
        }
        let (r, i, j, x1, x2) = best;
        let grid = self.phi.grid();
        Ok(TwoPathFit {
            d1: grid.distance(i),
            d2: grid.distance(j),
            x1,
            x2,
            i,
            j,
            residual: r.max(0.0).sqrt(),
        })
    }

    pub fn opt_single_fit(&self, v: &MeasurementVector) -> Result<SingleFit> {
        let (c, yy) = self.correlations(v)?;
        let mut best = (f64::INFINITY, 0, 0.0);
        for j in 0..self.phi.cols() {
            let (x, r) = self.single(&c, yy, j);
            if r < best.0 {
                best = (r, j, x);
            }
        }
        Ok(SingleFit {
            index: best.1,
            distance: self.phi.grid().distance(best.1),
            amplitude: best.2,
            residual: best.0.max(0.0).sqrt(),
        })
    }

    /// Depth of the best single path; always valid for a nonzero `v`.
    pub fn opt_single(&self, v: &MeasurementVector) -> DepthEstimate {
        match self.opt_single_fit(v) {
            Ok(f) => DepthEstimate { depth: f.distance, valid: true, confidence: 1.0, peak_index: Some(f.index) },
            Err(_) => DepthEstimate::invalid(),
        }
    }
}

pub fn ml_two_path(v: &MeasurementVector, phi: &DictionaryMatrix, noise: &NoiseModel) -> Result<TwoPathFit> {
    Baselines::new(phi, noise)?.ml_two_path(v)
}

pub fn opt_single(v: &MeasurementVector, phi: &DictionaryMatrix, noise: &NoiseModel) -> Result<DepthEstimate> {
    let b = Baselines::new(phi, noise)?;
    b.opt_single_fit(v)?;
    Ok(b.opt_single(v))
}
