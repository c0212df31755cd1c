//! The three depth estimators compared by every experiment.
//!
//! Measurements are raw sensor vectors. SRA solves with the literal noise
//! covariance `sigma^2 I`, relaxing epsilon when the program is infeasible, and
//! invalidates its first peaks against a noise model at `noise_margin * sigma`.
//! A noiseless measurement is fit exactly and its first peak is the depth.

use sra_core::baselines::Baselines;
use sra_core::depth::{extract_depth, find_peaks, invalidate_with, DepthEstimate, PeakList, PeakNoiseModel};
use sra_core::measurement::{Backscattering, DictionaryMatrix, MeasurementVector, NoiseModel};
use sra_core::sra::{solve_sra, solve_sra_relaxed, SraConfig};

use crate::config::SolverConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sra,
    Ml,
    OptSingle,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sra, Method::Ml, Method::OptSingle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sra => "SRA",
            Method::Ml => "ML",
            Method::OptSingle => "Opt-Single",
        }
    }
}

/// SRA output kept for peak statistics.
#[derive(Debug, Clone)]
pub struct SraOutcome {
    pub estimate: DepthEstimate,
    pub solution: Option<Backscattering>,
    pub peaks: PeakList,
}

#[derive(Debug, Clone)]
pub struct Estimators {
    phi: DictionaryMatrix,
    solver: SolverConfig,
    baselines: Baselines,
}

impl Estimators {
    pub fn new(phi: DictionaryMatrix, solver: SolverConfig) -> Result<Self> {
        let m = phi.freq().m();
        // isotropic weights give the same least-squares argmin at every sigma
        let baselines = Baselines::new(&phi, &NoiseModel::isotropic(m, 0.0))?;
        Ok(Estimators { phi, solver, baselines })
    }

    pub fn phi(&self) -> &DictionaryMatrix {
        &self.phi
    }

    /// Per-channel noise level `sigma` the measurement was drawn with.
    pub fn sra(&self, v: &MeasurementVector, sigma: f64) -> SraOutcome {
        let m = self.phi.freq().m();
        let s = &self.solver;
        let cfg = SraConfig::new(m).with_epsilon(s.epsilon).with_noise(NoiseModel::isotropic(m, sigma));
        if sigma == 0.0 {
            let solution = solve_sra(v, &self.phi, &cfg).ok();
            let estimate = solution.as_ref().map_or_else(DepthEstimate::invalid, |x| extract_depth(x, s.rel_threshold));
            let peaks = solution.as_ref().map(|x| find_peaks(x, s.rel_threshold)).unwrap_or_default();
            return SraOutcome { estimate, solution, peaks };
        }
        let Ok((x, _)) = solve_sra_relaxed(v, &self.phi, &cfg) else {
            return SraOutcome { estimate: DepthEstimate::invalid(), solution: None, peaks: PeakList::default() };
        };
        let peaks = find_peaks(&x, s.rel_threshold);
        let estimate = match PeakNoiseModel::new(&self.phi, &NoiseModel::isotropic(m, s.noise_margin * sigma)) {
            Ok(model) => invalidate_with(&peaks, |j| self.phi.grid().distance(j), &model, s.confidence),
            Err(_) => DepthEstimate::invalid(),
        };
        SraOutcome { estimate, solution: Some(x), peaks }
    }

    pub fn ml(&self, v: &MeasurementVector) -> DepthEstimate {
        match self.baselines.ml_two_path(v) {
            Ok(fit) => DepthEstimate { depth: fit.depth(), valid: true, confidence: 1.0, peak_index: None },
            Err(_) => DepthEstimate::invalid(),
        }
    }

    pub fn opt_single(&self, v: &MeasurementVector) -> DepthEstimate {
        self.baselines.opt_single(v)
    }

    pub fn estimate(&self, method: Method, v: &MeasurementVector, sigma: f64) -> DepthEstimate {
        match method {
            Method::Sra => self.sra(v, sigma).estimate,
            Method::Ml => self.ml(v),
            Method::OptSingle => self.opt_single(v),
        }
    }
}
