//! Per-pixel depth: normalize, solve, pick the first credible peak.
//!
//! The noise model is expressed for the unit-norm measurement `v / |v|_2`,
//! which is the only form a lookup table can encode (every canonical
//! measurement has unit norm). Since the L1L1 problem is homogeneous in
//! `(x, v)` for a fixed covariance, this is the same as solving the raw pixel
//! with covariance `(sigma |v|_2)^2 I`.

use crate::depth::{find_peaks, invalidate_with, DepthEstimate, PeakNoiseModel, DEFAULT_CONFIDENCE, DEFAULT_REL_THRESHOLD};
use crate::error::{Result, SraError};
use crate::measurement::{Backscattering, DictionaryMatrix, MeasurementVector, NoiseModel};
use crate::sra::{solve_sra, SraConfig};

/// Noise level of the unit-norm measurement used by the experiments and the LUT.
pub const DEFAULT_RELATIVE_SIGMA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub epsilon: f64,
    /// Per-channel noise standard deviation relative to `|v|_2`.
    pub sigma: f64,
    pub rel_threshold: f64,
    pub confidence: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: 0.05,
            sigma: DEFAULT_RELATIVE_SIGMA,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            confidence: DEFAULT_CONFIDENCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DepthPipeline {
    phi: DictionaryMatrix,
    cfg: PipelineConfig,
    sra: SraConfig,
    /// `None` when `sigma == 0`: every peak counts as signal.
    model: Option<PeakNoiseModel>,
}

impl DepthPipeline {
    pub fn new(phi: DictionaryMatrix, cfg: PipelineConfig) -> Result<Self> {
        let m = phi.freq().m();
        if !(cfg.sigma >= 0.0 && cfg.sigma.is_finite()) {
            return Err(SraError::Config(format!("relative sigma {} must be finite and >= 0", cfg.sigma)));
        }
        if !(0.0..=1.0).contains(&cfg.confidence) || !(0.0..1.0).contains(&cfg.rel_threshold) {
            return Err(SraError::Config("confidence and peak threshold must lie in [0, 1]".into()));
        }
        let noise = NoiseModel::isotropic(m, cfg.sigma);
        let sra = SraConfig::new(m).with_epsilon(cfg.epsilon).with_noise(noise.clone());
        let model = if cfg.sigma > 0.0 { Some(PeakNoiseModel::new(&phi, &noise)?) } else { None };
        Ok(DepthPipeline { phi, cfg, sra, model })
    }

    pub fn phi(&self) -> &DictionaryMatrix {
        &self.phi
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn sra_config(&self) -> &SraConfig {
        &self.sra
    }

    /// Backscattering of `v / |v|_2`.
    pub fn solve(&self, v: &MeasurementVector) -> Result<Backscattering> {
        let norm = v.l2_norm();
        if norm == 0.0 {
            return Err(SraError::ZeroMeasurement);
        }
        solve_sra(&v.scaled(1.0 / norm), &self.phi, &self.sra)
    }

    /// Depth on the dictionary's own grid. Zero measurements and infeasible
    /// programs give an invalid estimate.
    pub fn depth(&self, v: &MeasurementVector) -> DepthEstimate {
        match self.solve(v) {
            Ok(x) => self.depth_of(&x),
            Err(e) => {
                log::trace!("pixel invalid: {e}");
                DepthEstimate::invalid()
            }
        }
    }

    /// Depth of a backscattering already produced by [`DepthPipeline::solve`].
    pub fn depth_of(&self, x: &Backscattering) -> DepthEstimate {
        let peaks = find_peaks(x, self.cfg.rel_threshold);
        let grid = self.phi.grid();
        match &self.model {
            Some(model) => invalidate_with(&peaks, |j| grid.distance(j), model, self.cfg.confidence),
            None => match peaks.first() {
                Some(p) => DepthEstimate {
                    depth: grid.distance(p.index),
                    valid: true,
                    confidence: 1.0,
                    peak_index: Some(p.index),
                },
                None => DepthEstimate::invalid(),
            },
        }
    }
}
