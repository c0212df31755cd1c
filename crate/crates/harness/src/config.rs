//! Experiment configuration files.
//!
//! A configuration is a TOML document. Every section is optional and falls
//! back to the defaults below, so an empty file is a valid configuration:
//!
//! ```toml
//! [sensor]
//! frequencies_mhz = [120.0, 80.0, 16.0]
//! d_min = 20.0            # cm
//! d_max = 450.0
//! step = 1.0
//!
//! [solver]
//! epsilon = 0.05
//! noise_margin = 2.0      # invalidation assumes noise_margin * sigma
//! rel_threshold = 0.01
//! confidence = 0.9
//! amplitude_scale = 8.0   # sensor units of a unit scene amplitude
//!
//! [three_path]
//! spikes = [[100.0, 1.0], [200.0, 2.0], [300.0, 3.0]]   # (cm, relative amplitude)
//! snrs = [inf, 20.0, 10.0, 5.0]
//! trials = 1000
//!
//! [two_path_grid]
//! strengths = [0.6, 1.1, 1.7, 2.2, 2.8, 3.3, 3.9, 4.4, 5.0]
//! snrs = [inf, 25.5, 12.7, 8.5, 6.4, 5.1, 4.2, 3.6, 3.2]
//! d1_range = [20.0, 380.0]
//! separation_range = [40.0, 250.0]
//! instances = 8100
//!
//! [diffuse]
//! direct = [150.0, 1.0]
//! specular = [[260.0, 1.5]]
//! lobe = { alpha = 4.0, beta = 0.02, delta = 50.0, mass = 2.0 }
//! snrs = [inf, 20.0, 10.0, 5.0]
//! trials = 200
//!
//! [lut]
//! cells_per_dim = 32
//! relative_sigma = 0.05
//! chunk_cells = 65536
//!
//! [bench]
//! width = 512
//! height = 424
//! repeats = 10
//! ```
//!
//! Amplitudes in scenes are relative to the direct return and multiplied by
//! `amplitude_scale`. SNR is the direct amplitude over the per-channel noise
//! standard deviation times `sqrt(2m)`; `inf` means noiseless.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sra_core::lut::{LutConfig, DEFAULT_CELLS_PER_DIM};
use sra_core::measurement::{build_phi, DictionaryMatrix, DistanceGrid, FrequencyConfig};
use sra_core::pipeline::{PipelineConfig, DEFAULT_RELATIVE_SIGMA};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sensor: SensorConfig,
    pub solver: SolverConfig,
    pub three_path: ThreePathConfig,
    pub two_path_grid: GridConfig,
    pub diffuse: DiffuseConfig,
    pub lut: LutSection,
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub frequencies_mhz: Vec<f64>,
    pub d_min: f64,
    pub d_max: f64,
    pub step: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig { frequencies_mhz: vec![120.0, 80.0, 16.0], d_min: 20.0, d_max: 450.0, step: 1.0 }
    }
}

impl SensorConfig {
    pub fn frequencies(&self) -> Result<FrequencyConfig> {
        Ok(FrequencyConfig::from_mhz(&self.frequencies_mhz)?)
    }

    pub fn grid(&self) -> Result<DistanceGrid> {
        Ok(DistanceGrid::new(self.d_min, self.d_max, self.step)?)
    }

    pub fn dictionary(&self) -> Result<DictionaryMatrix> {
        Ok(build_phi(&self.grid()?, &self.frequencies()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub noise_margin: f64,
    pub rel_threshold: f64,
    pub confidence: f64,
    pub amplitude_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { epsilon: 0.05, noise_margin: 2.0, rel_threshold: 0.01, confidence: 0.9, amplitude_scale: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreePathConfig {
    pub spikes: Vec<(f64, f64)>,
    pub snrs: Vec<f64>,
    pub trials: usize,
}

impl Default for ThreePathConfig {
    fn default() -> Self {
        ThreePathConfig {
            spikes: vec![(100.0, 1.0), (200.0, 2.0), (300.0, 3.0)],
            snrs: vec![f64::INFINITY, 20.0, 10.0, 5.0],
            trials: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub strengths: Vec<f64>,
    pub snrs: Vec<f64>,
    pub d1_range: (f64, f64),
    pub separation_range: (f64, f64),
    /// Total number of instances over all cells.
    pub instances: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            strengths: vec![0.6, 1.1, 1.7, 2.2, 2.8, 3.3, 3.9, 4.4, 5.0],
            snrs: vec![f64::INFINITY, 25.5, 12.7, 8.5, 6.4, 5.1, 4.2, 3.6, 3.2],
            d1_range: (20.0, 380.0),
            separation_range: (40.0, 250.0),
            instances: 8100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LobeConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Onset offset past the direct return, cm.
    pub delta: f64,
    /// Lobe mass relative to the direct amplitude.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffuseConfig {
    pub direct: (f64, f64),
    pub specular: Vec<(f64, f64)>,
    pub lobe: LobeConfig,
    pub snrs: Vec<f64>,
    pub trials: usize,
}

impl Default for DiffuseConfig {
    fn default() -> Self {
        DiffuseConfig {
            direct: (150.0, 1.0),
            specular: vec![(260.0, 1.5)],
            lobe: LobeConfig { alpha: 4.0, beta: 0.02, delta: 50.0, mass: 2.0 },
            snrs: vec![f64::INFINITY, 20.0, 10.0, 5.0],
            trials: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LutSection {
    pub cells_per_dim: usize,
    pub relative_sigma: f64,
    /// Cells per resumable build chunk.
    pub chunk_cells: usize,
}

impl Default for LutSection {
    fn default() -> Self {
        LutSection { cells_per_dim: DEFAULT_CELLS_PER_DIM, relative_sigma: DEFAULT_RELATIVE_SIGMA, chunk_cells: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { width: 512, height: 424, repeats: 10 }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Config::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.frequencies()?;
        let grid = self.sensor.grid()?;
        let s = &self.solver;
        if !(s.epsilon > 0.0 && s.epsilon < 1.0) {
            return Err(HarnessError::Config(format!("epsilon {} outside (0, 1)", s.epsilon)));
        }
        if !(s.noise_margin > 0.0 && s.amplitude_scale > 0.0) {
            return Err(HarnessError::Config("noise_margin and amplitude_scale must be positive".into()));
        }
        let snrs = self.three_path.snrs.iter().chain(&self.two_path_grid.snrs).chain(&self.diffuse.snrs);
        if let Some(bad) = snrs.clone().find(|s| !(**s > 0.0) || s.is_nan()) {
            return Err(HarnessError::Config(format!("SNR {bad} must be positive (or inf)")));
        }
        let in_grid = |d: f64| d >= grid.d_min() && d <= grid.d_max();
        let spikes = self.three_path.spikes.iter().chain(&self.diffuse.specular).chain([&self.diffuse.direct]);
        if let Some((d, a)) = spikes.clone().find(|(d, a)| !in_grid(*d) || !(*a >= 0.0)) {
            return Err(HarnessError::Config(format!("spike ({d} cm, {a}) outside the grid or negative")));
        }
        if self.three_path.spikes.is_empty() {
            return Err(HarnessError::Config("three_path needs at least one spike".into()));
        }
        let g = &self.two_path_grid;
        if g.d1_range.0 > g.d1_range.1 || g.separation_range.0 > g.separation_range.1 || g.separation_range.0 < grid.step() {
            return Err(HarnessError::Config("two_path_grid ranges must be ordered, separations >= one grid step".into()));
        }
        if !in_grid(g.d1_range.0) || !in_grid(g.d1_range.1 + g.separation_range.0) {
            return Err(HarnessError::Config("two_path_grid ranges leave the distance grid".into()));
        }
        let l = &self.diffuse.lobe;
        if !(l.alpha >= 0.0 && l.beta > 0.0 && l.delta >= 0.0 && l.mass >= 0.0) {
            return Err(HarnessError::Config("lobe needs alpha >= 0, beta > 0, delta >= 0, mass >= 0".into()));
        }
        if self.lut.chunk_cells == 0 || self.bench.repeats == 0 {
            return Err(HarnessError::Config("chunk_cells and repeats must be positive".into()));
        }
        Ok(())
    }

    pub fn lut_config(&self) -> Result<LutConfig> {
        let freq = self.sensor.frequencies()?;
        let cfg = LutConfig {
            cells_per_dim: self.lut.cells_per_dim,
            k: freq.shortest(),
            freq,
            grid: self.sensor.grid()?,
            pipeline: PipelineConfig {
                epsilon: self.solver.epsilon,
                sigma: self.lut.relative_sigma,
                rel_threshold: self.solver.rel_threshold,
                confidence: self.solver.confidence,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key=value` lines describing the configuration, for output headers.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        vec![
            ("frequencies_mhz".into(), list(&self.sensor.frequencies_mhz)),
            ("grid_cm".into(), format!("{}:{}:{}", self.sensor.d_min, self.sensor.step, self.sensor.d_max)),
            ("epsilon".into(), self.solver.epsilon.to_string()),
            ("noise_margin".into(), self.solver.noise_margin.to_string()),
            ("rel_threshold".into(), self.solver.rel_threshold.to_string()),
            ("confidence".into(), self.solver.confidence.to_string()),
            ("amplitude_scale".into(), self.solver.amplitude_scale.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn documented_example_parses() {
        let doc: String = include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start().to_string() + "\n")
            .collect();
        assert_eq!(Config::parse(&doc).unwrap(), Config::default());
    }

    #[test]
    fn infinite_snr_and_overrides() {
        let cfg = Config::parse("[three_path]\nsnrs = [inf, 7.5]\ntrials = 3\n").unwrap();
        assert!(cfg.three_path.snrs[0].is_infinite());
        assert_eq!(cfg.three_path.trials, 3);
        assert_eq!(cfg.three_path.spikes.len(), 3);
    }

    #[test]
    fn malformed_rejected() {
        assert!(Config::parse("[three_path]\nspikes = [[900.0, 1.0]]\n").is_err());
        assert!(Config::parse("[solver]\nepsilon = 1.5\n").is_err());
        assert!(Config::parse("[solver]\nepsilonn = 0.1\n").is_err());
        assert!(Config::parse("[three_path]\nsnrs = [0.0]\n").is_err());
        assert!(Config::parse("[sensor]\nfrequencies_mhz = []\n").is_err());
        assert!(Config::parse("not toml at all [").is_err());
    }
}
