//! Depth from a recovered backscattering.
//!
//! The direct return has the shortest path, so depth is the distance of the
//! first significant peak. Adjacent bins above the relative threshold are
//! merged into one peak, since the LP tends to spread a return over a few
//! nearly collinear neighboring columns.
//!
//! With a noise model each peak also gets a probability of being produced by
//! noise alone, and the first peak whose chained probability of being the
//! true return exceeds a threshold is reported.

use std::f64::consts::{SQRT_2, TAU};

use statrs::function::erf::erfc;

use crate::error::Result;
use crate::measurement::{Backscattering, DictionaryMatrix, NoiseModel};

/// Relative peak threshold `c` used unless configured otherwise.
pub const DEFAULT_REL_THRESHOLD: f64 = 0.01;
/// Minimum probability of being the true return.
pub const DEFAULT_CONFIDENCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Total amplitude of the merged bins.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
}

impl PeakList {
    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn first(&self) -> Option<&Peak> {
        self.peaks.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEstimate {
    /// Distance in cm; NaN when invalid.
    pub depth: f64,
    pub valid: bool,
    pub confidence: f64,
    pub peak_index: Option<usize>,
}

impl DepthEstimate {
    pub fn invalid() -> Self {
        DepthEstimate { depth: f64::NAN, valid: false, confidence: 0.0, peak_index: None }
    }

    /// Shifts a valid estimate by `delta` cm.
    pub fn shifted(self, delta: f64) -> Self {
        DepthEstimate { depth: self.depth + delta, ..self }
    }
}

pub fn find_peaks(x: &Backscattering, rel_threshold: f64) -> PeakList {
    let amps = x.amplitudes();
    let max = x.max();
    if max <= 0.0 {
        return PeakList::default();
    }
    let cut = rel_threshold * max;
    let mut peaks = Vec::new();
    let mut j = 0;
    while j < amps.len() {
        if amps[j] <= cut {
            j += 1;
            continue;
        }
        let start = j;
        let (mut mass, mut moment) = (0.0, 0.0);
        while j < amps.len() && amps[j] > cut {
            mass += amps[j];
            moment += amps[j] * (j - start) as f64;
            j += 1;
        }
        let offset = moment / mass;
        // nearest bin, ties toward the smaller index
        let index = start + (offset - 0.5).ceil().max(0.0) as usize;
        peaks.push(Peak { index: index.min(j - 1), amplitude: mass });
    }
    PeakList { peaks }
}

pub fn extract_depth(x: &Backscattering, rel_threshold: f64) -> DepthEstimate {
    match find_peaks(x, rel_threshold).first() {
        Some(p) => DepthEstimate {
            depth: x.grid().distance(p.index),
            valid: true,
            confidence: 1.0,
            peak_index: Some(p.index),
        },
        None => DepthEstimate::invalid(),
    }
}

/// Probability that a peak of a given amplitude is produced by noise alone.
///
/// Under pure noise `eta ~ N(0, C)`, the matched-filter amplitude of column
/// `j` is Gaussian with standard deviation `1 / |C^{-1/2} phi_j|`. The chance
/// that any column along the dictionary reaches amplitude `a` is estimated by
/// the expected Euler characteristic of the excursion set of the normalized
/// process: the two-sided single-column tail plus the expected number of level
/// crossings, `(L / 2 pi) exp(-u^2 / 2)` per sign, where `L` is the arc length
/// of the whitened, normalized dictionary curve. The count is mapped to a
/// probability as `1 - exp(-E[chi])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakNoiseModel {
    /// Per-column amplitude standard deviation under noise.
    amp_sd: Vec<f64>,
    curve_length: f64,
}

impl PeakNoiseModel {
    pub fn new(phi: &DictionaryMatrix, noise: &NoiseModel) -> Result<Self> {
        let w = noise.inv_sqrt()?;
        let (rows, cols) = (phi.rows(), phi.cols());
        let mut amp_sd = Vec::with_capacity(cols);
        let mut prev: Option<Vec<f64>> = None;
        let mut curve_length = 0.0;
        for j in 0..cols {
            let u: Vec<f64> = (0..rows).map(|r| w[r] * phi.get(r, j)).collect();
            let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            amp_sd.push(1.0 / norm);
            let u: Vec<f64> = u.into_iter().map(|a| a / norm).collect();
            if let Some(p) = &prev {
                let chord: f64 = p.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                // chord to arc
                curve_length += 2.0 * (chord / 2.0).min(1.0).asin();
            }
            prev = Some(u);
        }
        Ok(PeakNoiseModel { amp_sd, curve_length })
    }

    pub fn curve_length(&self) -> f64 {
        self.curve_length
    }

    pub fn amplitude_sd(&self, index: usize) -> f64 {
        self.amp_sd[index]
    }

    pub fn probability(&self, amplitude: f64, index: usize) -> f64 {
        if amplitude <= 0.0 {
            return 1.0;
        }
        let u = amplitude / self.amp_sd[index];
        let single = erfc(u / SQRT_2);
        let crossings = 2.0 * self.curve_length / TAU * (-0.5 * u * u).exp();
        1.0 - (-(single + crossings)).exp()
    }
}

/// Chains peak noise probabilities: the `i`-th peak is the true return with
/// probability `prod_{l<i} p_l * (1 - p_i)`. Returns the first peak above
/// `threshold`, or an invalid estimate carrying the best probability seen.
pub fn invalidate_with(
    peaks: &PeakList,
    grid_distance: impl Fn(usize) -> f64,
    model: &PeakNoiseModel,
    threshold: f64,
) -> DepthEstimate {
    let mut all_noise = 1.0;
    let mut best: f64 = 0.0;
    for (i, p) in peaks.peaks.iter().enumerate() {
        let p_noise = model.probability(p.amplitude, p.index);
        let p_true = all_noise * (1.0 - p_noise);
        if p_true > threshold || (i == 0 && threshold <= 0.0) {
            return DepthEstimate {
                depth: grid_distance(p.index),
                valid: true,
                confidence: p_true,
                peak_index: Some(p.index),
            };
        }
        best = best.max(p_true);
        all_noise *= p_noise;
    }
    DepthEstimate { confidence: best, ..DepthEstimate::invalid() }
}

pub fn invalidate(
    peaks: &PeakList,
    phi: &DictionaryMatrix,
    noise: &NoiseModel,
    threshold: f64,
) -> Result<DepthEstimate> {
    let model = PeakNoiseModel::new(phi, noise)?;
    Ok(invalidate_with(peaks, |j| phi.grid().distance(j), &model, threshold))
}
