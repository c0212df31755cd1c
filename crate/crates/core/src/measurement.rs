//! Forward model of a multi-frequency AMCW time-of-flight pixel.
//!
//! A pixel measures `v_k = sum_j x_j exp(2 pi i d_j / lambda_k)` for each
//! modulation frequency `k`, where `x` is the backscattering over a grid of
//! path distances and `lambda_k = c / (2 f_k)`. The complex measurement is
//! handled in its stacked real form (real parts over imaginary parts) so the
//! model reads `v = Phi x` with a real `2m x n` dictionary.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SraError};

/// Speed of light in cm/s.
pub const SPEED_OF_LIGHT_CM_S: f64 = 29_979_245_800.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyConfig {
    frequencies: Vec<f64>,
    half_wavelengths: Vec<f64>,
}

impl FrequencyConfig {
    pub fn new(frequencies_hz: Vec<f64>) -> Result<Self> {
        if frequencies_hz.is_empty() {
            return Err(SraError::Config("at least one modulation frequency is required".into()));
        }
        if frequencies_hz.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(SraError::Config("modulation frequencies must be positive".into()));
        }
        for (i, a) in frequencies_hz.iter().enumerate() {
            if frequencies_hz[..i].contains(a) {
                return Err(SraError::Config(format!("duplicate modulation frequency {a} Hz")));
            }
        }
        let half_wavelengths = frequencies_hz
            .iter()
            .map(|f| SPEED_OF_LIGHT_CM_S / (2.0 * f))
            .collect();
        Ok(FrequencyConfig { frequencies: frequencies_hz, half_wavelengths })
    }

    pub fn from_mhz(mhz: &[f64]) -> Result<Self> {
        Self::new(mhz.iter().map(|f| f * 1e6).collect())
    }

    pub fn m(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Half wavelengths in cm.
    pub fn half_wavelengths(&self) -> &[f64] {
        &self.half_wavelengths
    }

    pub fn half_wavelength(&self, k: usize) -> f64 {
        self.half_wavelengths[k]
    }

    /// Index of the shortest half wavelength.
    pub fn shortest(&self) -> usize {
        let mut best = 0;
        for (k, l) in self.half_wavelengths.iter().enumerate() {
            if *l < self.half_wavelengths[best] {
                best = k;
            }
        }
        best
    }
}

impl Default for FrequencyConfig {
    /// 120, 80 and 16 MHz.
    fn default() -> Self {
        Self::from_mhz(&[120.0, 80.0, 16.0]).expect("default frequencies are valid")
    }
}

/// Uniform grid of path distances in cm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceGrid {
    d_min: f64,
    d_max: f64,
    step: f64,
    n: usize,
}

impl DistanceGrid {
    pub fn new(d_min: f64, d_max: f64, step: f64) -> Result<Self> {
        if !(d_min.is_finite() && d_max.is_finite() && step.is_finite()) {
            return Err(SraError::Config("grid parameters must be finite".into()));
        }
        if d_min >= d_max || step <= 0.0 {
            return Err(SraError::Config(format!(
                "invalid grid [{d_min}, {d_max}] with step {step}"
            )));
        }
        // Guard against (450 - 20) / 1 landing a hair below an integer.
        let span = (d_max - d_min) / step;
        let n = (span + 1e-9 * span.max(1.0)).floor() as usize + 1;
        Ok(DistanceGrid { d_min, d_max, step, n })
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, j: usize) -> f64 {
        self.d_min + j as f64 * self.step
    }

    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.distance(j))
    }

    /// Nearest grid index, ties resolved toward the smaller index.
    pub fn nearest_index(&self, d: f64) -> Result<usize> {
        let tol = 1e-9 * self.step;
        if !d.is_finite() || d < self.d_min - tol || d > self.d_max + tol {
            return Err(SraError::OutOfGrid(d));
        }
        let t = (d - self.d_min) / self.step;
        let j = (t - 0.5).ceil().max(0.0) as usize;
        Ok(j.min(self.n - 1))
    }
}

impl Default for DistanceGrid {
    /// 20 cm to 450 cm in 1 cm steps (431 points).
    fn default() -> Self {
        DistanceGrid::new(20.0, 450.0, 1.0).expect("default grid is valid")
    }
}

/// Nonnegative amplitude profile over a distance grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Backscattering {
    amplitudes: Vec<f64>,
    grid: DistanceGrid,
}

impl Backscattering {
    pub fn zeros(grid: DistanceGrid) -> Self {
        Backscattering { amplitudes: vec![0.0; grid.len()], grid }
    }

    pub fn new(amplitudes: Vec<f64>, grid: DistanceGrid) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(SraError::Dimension { expected: grid.len(), actual: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(SraError::Config("backscattering amplitudes must be finite and nonnegative".into()));
        }
        Ok(Backscattering { amplitudes, grid })
    }

    /// Clamps tiny negative round-off from a solver to zero.
    pub(crate) fn from_solver(mut amplitudes: Vec<f64>, grid: DistanceGrid) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.len());
        for a in &mut amplitudes {
            if *a < 0.0 || !a.is_finite() {
                *a = 0.0;
            }
        }
        Backscattering { amplitudes, grid }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn grid(&self) -> &DistanceGrid {
        &self.grid
    }

    pub fn l1_norm(&self) -> f64 {
        self.amplitudes.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.amplitudes.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Backscattering {
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
            grid: self.grid,
        }
    }

    /// Indices holding more than `rel` times the maximum amplitude.
    pub fn support(&self, rel: f64) -> Vec<usize> {
        let cut = rel * self.max();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > cut && **a > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    fn add_at(&mut self, d: f64, amp: f64) -> Result<()> {
        let j = self.grid.nearest_index(d)?;
        self.amplitudes[j] += amp;
        Ok(())
    }
}

/// One pixel reading, stored in stacked real form `[Re v_1..Re v_m, Im v_1..Im v_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    real: Vec<f64>,
}

impl MeasurementVector {
    pub fn from_real(real: Vec<f64>) -> Result<Self> {
        if real.is_empty() || !real.len().is_multiple_of(2) {
            return Err(SraError::Config(format!(
                "stacked measurement must have even nonzero length, got {}",
                real.len()
            )));
        }
        Ok(MeasurementVector { real })
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        let m = values.len();
        let mut real = vec![0.0; 2 * m];
        for (k, z) in values.iter().enumerate() {
            real[k] = z.re;
            real[k + m] = z.im;
        }
        MeasurementVector { real }
    }

    pub fn zeros(m: usize) -> Self {
        MeasurementVector { real: vec![0.0; 2 * m] }
    }

    pub fn m(&self) -> usize {
        self.real.len() / 2
    }

    pub fn real_view(&self) -> &[f64] {
        &self.real
    }

    pub fn component(&self, k: usize) -> Complex64 {
        Complex64::new(self.real[k], self.real[k + self.m()])
    }

    pub fn complex_view(&self) -> Vec<Complex64> {
        (0..self.m()).map(|k| self.component(k)).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.real.iter().map(|x| x.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.real.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.real.iter().all(|x| *x == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        MeasurementVector { real: self.real.iter().map(|x| x * s).collect() }
    }
}

/// Stacked real dictionary: row `k` holds `cos(2 pi d_j / lambda_k)`, row
/// `k + m` holds `sin(2 pi d_j / lambda_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMatrix {
    entries: Vec<f64>,
    grid: DistanceGrid,
    freq: FrequencyConfig,
}

impl DictionaryMatrix {
    pub(crate) fn from_parts(entries: Vec<f64>, grid: DistanceGrid, freq: FrequencyConfig) -> Self {
        debug_assert_eq!(entries.len(), 2 * freq.m() * grid.len());
        DictionaryMatrix { entries, grid, freq }
    }

    pub fn rows(&self) -> usize {
        2 * self.freq.m()
    }

    pub fn cols(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &DistanceGrid {
        &self.grid
    }

    pub fn freq(&self) -> &FrequencyConfig {
        &self.freq
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.cols();
        &self.entries[row * n..(row + 1) * n]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    /// Row-major `2m x n` entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `Phi x` for a raw amplitude slice.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

pub fn build_phi(grid: &DistanceGrid, freq: &FrequencyConfig) -> DictionaryMatrix {
    let m = freq.m();
    let n = grid.len();
    let mut entries = vec![0.0; 2 * m * n];
    for k in 0..m {
        let lambda = freq.half_wavelength(k);
        for j in 0..n {
            let (s, c) = (TAU * grid.distance(j) / lambda).sin_cos();
            entries[k * n + j] = c;
            entries[(k + m) * n + j] = s;
        }
    }
    DictionaryMatrix { entries, grid: *grid, freq: freq.clone() }
}

pub fn synthesize(x: &Backscattering, phi: &DictionaryMatrix) -> Result<MeasurementVector> {
    if x.grid() != phi.grid() {
        return Err(SraError::Dimension { expected: phi.cols(), actual: x.amplitudes().len() });
    }
    Ok(MeasurementVector { real: phi.apply(x.amplitudes()) })
}

pub fn make_two_path(d1: f64, d2: f64, x1: f64, x2: f64, grid: &DistanceGrid) -> Result<Backscattering> {
    if d1 >= d2 {
        return Err(SraError::Config(format!("direct path {d1} must precede {d2}")));
    }
    if !(x1 > 0.0 && x2 > 0.0) {
        return Err(SraError::Config("path amplitudes must be positive".into()));
    }
    make_multi_path(&[(d1, x1), (d2, x2)], grid)
}

/// Sparse backscattering from `(distance, amplitude)` spikes. Spikes that snap
/// to the same grid index accumulate.
pub fn make_multi_path(spikes: &[(f64, f64)], grid: &DistanceGrid) -> Result<Backscattering> {
    let mut x = Backscattering::zeros(*grid);
    for &(d, amp) in spikes {
        if !(amp > 0.0 && amp.is_finite()) {
            return Err(SraError::Config(format!("spike amplitude {amp} must be positive")));
        }
        x.add_at(d, amp)?;
    }
    Ok(x)
}

/// Diffuse return `A c^alpha exp(-beta c)` starting `delta` cm behind the direct path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffuseLobe {
    pub amplitude: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl DiffuseLobe {
    pub fn density(&self, c: f64) -> f64 {
        self.amplitude * c.powf(self.alpha) * (-self.beta * c).exp()
    }

    /// Grid points (index, value * step) that the lobe occupies behind a direct path at `d1`.
    fn discretize(&self, d1: f64, grid: &DistanceGrid) -> Result<Vec<(usize, f64)>> {
        if !(self.amplitude >= 0.0 && self.beta > 0.0 && self.delta >= 0.0) {
            return Err(SraError::Config("lobe requires A >= 0, beta > 0, delta >= 0".into()));
        }
        let mut out = Vec::new();
        if self.amplitude == 0.0 {
            return Ok(out);
        }
        let onset = d1 + self.delta;
        for j in 0..grid.len() {
            let c = grid.distance(j);
            if c <= onset {
                continue;
            }
            let val = self.density(c);
            if !val.is_finite() {
                return Err(SraError::Config(format!("lobe is not finite at {c} cm")));
            }
            out.push((j, val * grid.step()));
        }
        // truncate relative to the lobe peak on the grid
        let peak = out.iter().fold(0.0f64, |a, (_, v)| a.max(*v));
        out.retain(|(_, v)| *v >= 1e-6 * peak && *v > 0.0);
        Ok(out)
    }

    /// Discretized lobe mass behind a direct path at `d1`.
    pub fn mass(&self, d1: f64, grid: &DistanceGrid) -> Result<f64> {
        Ok(self.discretize(d1, grid)?.iter().map(|(_, v)| v).sum())
    }

    /// Same shape, rescaled so the discretized mass equals `target`.
    pub fn with_mass(&self, target: f64, d1: f64, grid: &DistanceGrid) -> Result<Self> {
        let unit = DiffuseLobe { amplitude: 1.0, ..*self };
        let mass = unit.mass(d1, grid)?;
        if mass <= 0.0 {
            return Err(SraError::Config("lobe has no support on the grid".into()));
        }
        Ok(DiffuseLobe { amplitude: target / mass, ..*self })
    }
}

/// Direct spike `(d1, x1)` plus a diffuse lobe. `x1 = 0` gives a lobe-only profile.
pub fn make_diffuse(direct: (f64, f64), lobe: &DiffuseLobe, grid: &DistanceGrid) -> Result<Backscattering> {
    let (d1, x1) = direct;
    if !(x1 >= 0.0 && x1.is_finite()) {
        return Err(SraError::Config("direct amplitude must be nonnegative".into()));
    }
    let mut x = Backscattering::zeros(*grid);
    if x1 > 0.0 {
        x.add_at(d1, x1)?;
    } else {
        grid.nearest_index(d1)?;
    }
    for (j, v) in lobe.discretize(d1, grid)? {
        x.amplitudes[j] += v;
    }
    Ok(x)
}

/// Diagonal noise covariance over the stacked real channels.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    variances: Vec<f64>,
}

impl NoiseModel {
    /// Arbitrary diagonal; entries must be finite and nonnegative.
    pub fn diagonal(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() || !variances.len().is_multiple_of(2) {
            return Err(SraError::Config("noise covariance must be 2m x 2m".into()));
        }
        if variances.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SraError::Config("noise variances must be finite and nonnegative".into()));
        }
        Ok(NoiseModel { variances })
    }

    /// `sigma^2 I`, paired by construction.
    pub fn isotropic(m: usize, sigma: f64) -> Self {
        NoiseModel { variances: vec![sigma * sigma; 2 * m] }
    }

    /// One standard deviation per frequency, shared by its real and imaginary channel.
    pub fn paired(sigmas: &[f64]) -> Result<Self> {
        let mut v: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
        v.extend_from_within(..);
        Self::diagonal(v)
    }

    pub fn m(&self) -> usize {
        self.variances.len() / 2
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn is_paired(&self) -> bool {
        let m = self.m();
        (0..m).all(|j| self.variances[j] == self.variances[j + m])
    }

    pub fn is_positive(&self) -> bool {
        self.variances.iter().all(|v| *v > 0.0)
    }

    /// Per-frequency standard deviations, taken from the real channels.
    pub fn sigmas(&self) -> Vec<f64> {
        self.variances[..self.m()].iter().map(|v| v.sqrt()).collect()
    }

    /// Diagonal of `C^{-1/2}`.
    pub fn inv_sqrt(&self) -> Result<Vec<f64>> {
        if !self.is_positive() {
            return Err(SraError::Config("noise covariance must be strictly positive".into()));
        }
        Ok(self.variances.iter().map(|v| 1.0 / v.sqrt()).collect())
    }
}

/// Per-channel standard deviation giving `snr = x1 / (sqrt(2m) sigma)`.
pub fn sigma_for_snr(x1: f64, snr: f64, m: usize) -> f64 {
    if snr.is_infinite() {
        0.0
    } else {
        x1 / ((2 * m) as f64).sqrt() / snr
    }
}

pub fn add_noise(v: &MeasurementVector, noise: &NoiseModel, seed: u64) -> MeasurementVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise_with(v, noise, &mut rng)
}

/// Like [`add_noise`] but draws from a caller-owned generator.
pub fn add_noise_with<R: Rng + ?Sized>(v: &MeasurementVector, noise: &NoiseModel, rng: &mut R) -> MeasurementVector {
    assert_eq!(v.real.len(), noise.variances.len(), "noise model size mismatch");
    if !noise.is_paired() {
        log::warn!("noise covariance is not paired; canonical invariance does not apply");
    }
    let real = v
        .real
        .iter()
        .zip(&noise.variances)
        .map(|(x, var)| {
            let z: f64 = rng.sample(StandardNormal);
            x + var.sqrt() * z
        })
        .collect();
    MeasurementVector { real }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressibilityProfile {
    /// Amplitudes sorted in descending order.
    pub sorted: Vec<f64>,
    /// Scale `R` of the power-law fit `x_(i) ~ R i^{-1/r}`.
    pub scale: f64,
    /// Exponent `r`; zero when a single nonzero entry leaves nothing to fit.
    pub r: f64,
}

pub fn compressibility_profile(x: &Backscattering) -> Result<CompressibilityProfile> {
    let mut sorted = x.amplitudes().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let nonzero: Vec<(f64, f64)> = sorted
        .iter()
        .take_while(|a| **a > 0.0)
        .enumerate()
        .map(|(i, a)| (((i + 1) as f64).ln(), a.ln()))
        .collect();
    match nonzero.len() {
        0 => Err(SraError::Config("compressibility of an all-zero backscattering".into())),
        1 => Ok(CompressibilityProfile { scale: sorted[0], r: 0.0, sorted }),
        k => {
            let kf = k as f64;
            let mx = nonzero.iter().map(|p| p.0).sum::<f64>() / kf;
            let my = nonzero.iter().map(|p| p.1).sum::<f64>() / kf;
            let sxy: f64 = nonzero.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = nonzero.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            let scale = (my - slope * mx).exp();
            let r = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
            Ok(CompressibilityProfile { sorted, scale, r })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn phase(z: Complex64) -> f64 {
        z.arg().rem_euclid(TAU)
    }

    #[test]
    fn half_wavelengths_match_frequencies() {
        let f = FrequencyConfig::default();
        for k in 0..f.m() {
            let rel = (f.half_wavelength(k) * 2.0 * f.frequencies()[k] - SPEED_OF_LIGHT_CM_S).abs()
                / SPEED_OF_LIGHT_CM_S;
            assert!(rel < 1e-9);
        }
        assert_eq!(f.shortest(), 0);
    }

    #[test]
    fn rejects_bad_frequencies() {
        assert!(FrequencyConfig::new(vec![]).is_err());
        assert!(FrequencyConfig::new(vec![1e6, -1e6]).is_err());
        assert!(FrequencyConfig::new(vec![1e6, 1e6]).is_err());
    }

    #[test]
    fn default_grid_has_431_points() {
        let g = DistanceGrid::default();
        assert_eq!(g.len(), 431);
        assert_eq!(g.distance(430), 450.0);
        assert!(DistanceGrid::new(5.0, 5.0, 1.0).is_err());
        assert!(DistanceGrid::new(0.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn nearest_index_ties_go_down() {
        let g = DistanceGrid::new(0.0, 10.0, 1.0).unwrap();
        assert_eq!(g.nearest_index(2.5).unwrap(), 2);
        assert_eq!(g.nearest_index(2.51).unwrap(), 3);
        assert_eq!(g.nearest_index(0.0).unwrap(), 0);
        assert_eq!(g.nearest_index(10.0).unwrap(), 10);
        assert!(g.nearest_index(10.5).is_err());
        assert!(g.nearest_index(-0.1).is_err());
    }

    #[test]
    fn phi_single_zero_distance_column() {
        let g = DistanceGrid::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(g.len(), 1);
        let phi = build_phi(&g, &FrequencyConfig::default());
        assert_eq!(phi.column(0), vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn phi_default_shape_and_norms() {
        let phi = build_phi(&DistanceGrid::default(), &FrequencyConfig::default());
        assert_eq!((phi.rows(), phi.cols()), (6, 431));
        for j in 0..phi.cols() {
            let n2: f64 = phi.column(j).iter().map(|x| x * x).sum();
            assert_relative_eq!(n2, 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_half_period_is_minus_one() {
        let f = FrequencyConfig::default();
        let half = f.half_wavelength(0) / 2.0;
        let g = DistanceGrid::new(half, half + 1.0, 1.0).unwrap();
        let phi = build_phi(&g, &f);
        assert_relative_eq!(phi.get(0, 0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn phi_aliases_after_one_half_wavelength() {
        let f = FrequencyConfig::default();
        for k in 0..f.m() {
            let l = f.half_wavelength(k);
            let g = DistanceGrid::new(37.0, 37.0 + l, l).unwrap();
            let phi = build_phi(&g, &f);
            assert_relative_eq!(phi.get(k, 0), phi.get(k, 1), epsilon = 1e-9);
            assert_relative_eq!(phi.get(k + 3, 0), phi.get(k + 3, 1), epsilon = 1e-9);
        }
    }

    #[test]
    fn single_spike_has_expected_phases() {
        let g = DistanceGrid::default();
        let f = FrequencyConfig::default();
        let phi = build_phi(&g, &f);
        for d in [20.0, 133.0, 287.0, 450.0] {
            let x = make_multi_path(&[(d, 1.0)], &g).unwrap();
            let v = synthesize(&x, &phi).unwrap();
            for k in 0..3 {
                let z = v.component(k);
                assert_relative_eq!(z.norm(), 1.0, epsilon = 1e-12);
                let expect = (TAU * d / f.half_wavelength(k)).rem_euclid(TAU);
                let diff = (phase(z) - expect).rem_euclid(TAU);
                assert!(diff.min(TAU - diff) < 1e-9);
            }
        }
    }

    #[test]
    fn two_path_matches_closed_form() {
        let g = DistanceGrid::default();
        let f = FrequencyConfig::default();
        let phi = build_phi(&g, &f);
        let x = make_two_path(100.0, 200.0, 1.0, 2.0, &g).unwrap();
        assert_eq!(x.support(0.0), vec![80, 180]);
        assert_eq!(x.amplitudes()[180], 2.0);
        let v = synthesize(&x, &phi).unwrap();
        for k in 0..3 {
            let l = f.half_wavelength(k);
            let expect = Complex64::from_polar(1.0, TAU * 100.0 / l) + Complex64::from_polar(2.0, TAU * 200.0 / l);
            assert!((v.component(k) - expect).norm() < 1e-12);
        }
        assert!(make_two_path(200.0, 100.0, 1.0, 1.0, &g).is_err());
        assert!(make_two_path(100.0, 500.0, 1.0, 1.0, &g).is_err());
        assert!(make_two_path(100.0, 200.0, 0.0, 1.0, &g).is_err());
    }

    #[test]
    fn zero_backscattering_gives_zero_measurement() {
        let g = DistanceGrid::default();
        let phi = build_phi(&g, &FrequencyConfig::default());
        let v = synthesize(&make_multi_path(&[], &g).unwrap(), &phi).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn colliding_spikes_accumulate() {
        let g = DistanceGrid::default();
        let x = make_multi_path(&[(150.0, 1.0), (150.0, 1.0)], &g).unwrap();
        assert_eq!(x.support(0.0), vec![130]);
        assert_eq!(x.amplitudes()[130], 2.0);
        let three = make_multi_path(&[(100.0, 1.0), (200.0, 2.0), (300.0, 3.0)], &g).unwrap();
        assert_eq!(three.support(0.0), vec![80, 180, 280]);
    }

    #[test]
    fn synthesize_rejects_misaligned_grid() {
        let phi = build_phi(&DistanceGrid::default(), &FrequencyConfig::default());
        let other = Backscattering::zeros(DistanceGrid::new(0.0, 10.0, 1.0).unwrap());
        assert!(synthesize(&other, &phi).is_err());
    }

    #[test]
    fn measurement_views_roundtrip() {
        let z = vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 3.0)];
        let v = MeasurementVector::from_complex(&z);
        assert_eq!(v.real_view(), &[1.0, 0.5, -2.0, 3.0]);
        assert_eq!(v.complex_view(), z);
    }

    #[test]
    fn diffuse_without_lobe_is_single_path() {
        let g = DistanceGrid::default();
        let lobe = DiffuseLobe { amplitude: 0.0, alpha: 1.0, beta: 0.05, delta: 5.0 };
        let x = make_diffuse((150.0, 1.0), &lobe, &g).unwrap();
        assert_eq!(x, make_multi_path(&[(150.0, 1.0)], &g).unwrap());
    }

    #[test]
    fn diffuse_sharp_lobe_decays_geometrically() {
        let g = DistanceGrid::default();
        let lobe = DiffuseLobe { amplitude: 1.0, alpha: 0.0, beta: 2.0, delta: 10.0 };
        let x = make_diffuse((100.0, 1.0), &lobe, &g).unwrap();
        let a = x.amplitudes();
        // first lobe bin is 111 cm (index 91)
        assert_eq!(a[90], 0.0);
        assert!(a[91] > 0.0);
        let ratio = a[92] / a[91];
        assert_relative_eq!(ratio, (-2.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(a[93] / a[92], ratio, epsilon = 1e-12);
    }

    #[test]
    fn diffuse_mass_calibration() {
        let g = DistanceGrid::default();
        let shape = DiffuseLobe { amplitude: 1.0, alpha: 1.0, beta: 0.03, delta: 10.0 };
        let lobe = shape.with_mass(2.0, 150.0, &g).unwrap();
        // independent trapezoid-free Riemann sum over the grid
        let vals: Vec<f64> = g.distances().filter(|c| *c > 160.0).map(|c| lobe.amplitude * c * (-0.03 * c).exp()).collect();
        let peak = vals.iter().cloned().fold(0.0, f64::max);
        let mass: f64 = vals.iter().filter(|v| **v >= 1e-6 * peak).sum();
        assert_relative_eq!(mass, 2.0, epsilon = 1e-12);
        let x = make_diffuse((150.0, 1.0), &lobe, &g).unwrap();
        assert_relative_eq!(x.l1_norm(), 3.0, epsilon = 1e-12);
        let bad = DiffuseLobe { beta: 0.0, ..shape };
        assert!(make_diffuse((150.0, 1.0), &bad, &g).is_err());
    }

    #[test]
    fn zero_noise_leaves_measurement() {
        let v = MeasurementVector::from_real(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(add_noise(&v, &NoiseModel::isotropic(3, 0.0), 7), v);
    }

    #[test]
    fn noise_is_seed_deterministic() {
        let v = MeasurementVector::zeros(3);
        let n = NoiseModel::isotropic(3, 0.3);
        assert_eq!(add_noise(&v, &n, 11), add_noise(&v, &n, 11));
        assert_ne!(add_noise(&v, &n, 11), add_noise(&v, &n, 12));
    }

    #[test]
    fn noise_variance_matches_model() {
        let sigmas = [0.5, 1.0, 2.0];
        let n = NoiseModel::paired(&sigmas).unwrap();
        assert!(n.is_paired());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = MeasurementVector::zeros(3);
        let draws = 100_000;
        let mut acc = [0.0; 6];
        for _ in 0..draws {
            let w = add_noise_with(&v, &n, &mut rng);
            for (a, x) in acc.iter_mut().zip(w.real_view()) {
                *a += x * x;
            }
        }
        for (c, a) in acc.iter().enumerate() {
            let var = a / draws as f64;
            let want = sigmas[c % 3].powi(2);
            assert!((var - want).abs() / want < 0.05, "channel {c}: {var} vs {want}");
        }
    }

    #[test]
    fn snr_convention() {
        let s = sigma_for_snr(1.0, 5.0, 3);
        assert_relative_eq!(1.0 / (6f64.sqrt() * s), 5.0, epsilon = 1e-12);
        assert_eq!(sigma_for_snr(1.0, f64::INFINITY, 3), 0.0);
    }

    #[test]
    fn compressibility_of_sparse_and_power_law() {
        let g = DistanceGrid::default();
        let x = make_multi_path(&[(100.0, 1.0), (200.0, 2.0), (300.0, 3.0)], &g).unwrap();
        let p = compressibility_profile(&x).unwrap();
        assert_eq!(p.sorted.iter().filter(|a| **a > 0.0).count(), 3);
        assert_eq!(&p.sorted[..3], &[3.0, 2.0, 1.0]);

        let amps: Vec<f64> = (1..=g.len()).map(|i| (i as f64).powi(-2)).collect();
        let p = compressibility_profile(&Backscattering::new(amps, g).unwrap()).unwrap();
        assert_relative_eq!(p.r, 0.5, epsilon = 1e-9);
        assert_relative_eq!(p.scale, 1.0, epsilon = 1e-9);

        assert!(compressibility_profile(&Backscattering::zeros(g)).is_err());
    }

    #[test]
    fn diffuse_lobe_is_compressible() {
        let g = DistanceGrid::default();
        let lobe = DiffuseLobe { amplitude: 1.0, alpha: 1.0, beta: 0.03, delta: 10.0 };
        let x = make_diffuse((150.0, 0.0), &lobe, &g).unwrap();
        let p = compressibility_profile(&x).unwrap();
        assert!(p.r <= 1.0, "r = {}", p.r);
    }

    #[test]
    fn synthesize_is_linear() {
        let g = DistanceGrid::default();
        let phi = build_phi(&g, &FrequencyConfig::default());
        let x = make_multi_path(&[(50.0, 0.3), (250.0, 1.7)], &g).unwrap();
        let y = make_multi_path(&[(120.0, 2.0), (400.0, 0.2)], &g).unwrap();
        let (a, b) = (1.5, 0.25);
        let comb: Vec<f64> = x.amplitudes().iter().zip(y.amplitudes()).map(|(p, q)| a * p + b * q).collect();
        let lhs = synthesize(&Backscattering::new(comb, g).unwrap(), &phi).unwrap();
        let vx = synthesize(&x, &phi).unwrap();
        let vy = synthesize(&y, &phi).unwrap();
        for r in 0..6 {
            let rhs = a * vx.real_view()[r] + b * vy.real_view()[r];
            assert!((lhs.real_view()[r] - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
        }
    }
}
