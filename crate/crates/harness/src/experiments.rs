//! Synthetic experiments: the three-path table, the two-path heatmap and the
//! diffuse plus specular table.
//!
//! Every instance draws from its own generator, `ChaCha8` seeded with the run
//! seed on stream `instance id`, and results are written back by index, so a
//! table does not depend on the number of workers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sra_core::exec::Executor;
use sra_core::measurement::{
    add_noise_with, make_diffuse, make_multi_path, sigma_for_snr, synthesize, Backscattering, DiffuseLobe,
    DistanceGrid, MeasurementVector, NoiseModel,
};

use crate::config::{Config, DiffuseConfig, GridConfig};
use crate::error::{HarnessError, Result};
use crate::estimators::{Estimators, Method};

pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

/// Aggregate of per-instance absolute errors; invalid estimates are counted
/// but excluded from the statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub median: f64,
    pub mean: f64,
    pub invalid_fraction: f64,
    pub valid: usize,
}

impl ErrorSummary {
    pub fn from_errors(errors: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut total = 0;
        let mut valid: Vec<f64> = Vec::new();
        for e in errors {
            total += 1;
            valid.extend(e);
        }
        let invalid_fraction = if total == 0 { 0.0 } else { 1.0 - valid.len() as f64 / total as f64 };
        let mean = if valid.is_empty() { f64::NAN } else { valid.iter().sum::<f64>() / valid.len() as f64 };
        ErrorSummary { median: median(&mut valid), mean, invalid_fraction, valid: valid.len() }
    }
}

/// Median with the two middle values averaged; NaN when empty.
pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn noisy(v: &MeasurementVector, sigma: f64, rng: &mut ChaCha8Rng) -> MeasurementVector {
    if sigma == 0.0 {
        v.clone()
    } else {
        add_noise_with(v, &NoiseModel::isotropic(v.m(), sigma), rng)
    }
}

fn abs_error(d: sra_core::depth::DepthEstimate, truth: f64) -> Option<f64> {
    d.valid.then(|| (d.depth - truth).abs())
}

/// One SNR row of a per-method table.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub snr: f64,
    pub sigma: f64,
    pub errors: [ErrorSummary; 3],
    /// Median position of each of the largest SRA peaks, in distance order.
    pub sra_peaks: Vec<f64>,
}

impl MethodRow {
    pub fn summary(&self, method: Method) -> &ErrorSummary {
        &self.errors[Method::ALL.iter().position(|m| *m == method).unwrap()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodTable {
    pub true_depth: f64,
    /// True path distances, nearest first.
    pub paths: Vec<f64>,
    pub trials: usize,
    pub rows: Vec<MethodRow>,
}

struct Outcome {
    errors: [Option<f64>; 3],
    peaks: Option<Vec<f64>>,
}

/// Runs all three estimators on `trials` noisy copies of `x` per SNR.
#[allow(clippy::too_many_arguments)]
fn method_table(
    est: &Estimators,
    x: &Backscattering,
    direct_amplitude: f64,
    paths: Vec<f64>,
    snrs: &[f64],
    trials: usize,
    seed: u64,
    exec: &Executor,
) -> Result<MethodTable> {
    let phi = est.phi();
    let m = phi.freq().m();
    let v = synthesize(x, phi)?;
    let truth = paths[0];
    let k = paths.len();
    let mut rows = Vec::with_capacity(snrs.len());
    for (si, &snr) in snrs.iter().enumerate() {
        let sigma = sigma_for_snr(direct_amplitude, snr, m);
        let outcomes = exec.map(trials, |t| {
            let mut rng = instance_rng(seed, (si * trials + t) as u64);
            let vn = noisy(&v, sigma, &mut rng);
            let sra = est.sra(&vn, sigma);
            let peaks = (sra.peaks.len() >= k).then(|| {
                let mut top = sra.peaks.peaks.clone();
                top.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
                let mut idx: Vec<usize> = top[..k].iter().map(|p| p.index).collect();
                idx.sort_unstable();
                idx.into_iter().map(|j| phi.grid().distance(j)).collect()
            });
            Outcome {
                errors: [
                    abs_error(sra.estimate, truth),
                    abs_error(est.ml(&vn), truth),
                    abs_error(est.opt_single(&vn), truth),
                ],
                peaks,
            }
        });
        let errors = [0, 1, 2].map(|i| ErrorSummary::from_errors(outcomes.iter().map(|o| o.errors[i])));
        let sra_peaks = (0..k)
            .map(|slot| median(&mut outcomes.iter().filter_map(|o| o.peaks.as_ref().map(|p| p[slot])).collect::<Vec<_>>()))
            .collect();
        rows.push(MethodRow { snr, sigma, errors, sra_peaks });
    }
    Ok(MethodTable { true_depth: truth, paths, trials, rows })
}

pub fn run_three_path(cfg: &Config, seed: u64, exec: &Executor) -> Result<MethodTable> {
    let est = Estimators::new(cfg.sensor.dictionary()?, cfg.solver.clone())?;
    let a = cfg.solver.amplitude_scale;
    let mut spikes: Vec<(f64, f64)> = cfg.three_path.spikes.iter().map(|&(d, x)| (d, x * a)).collect();
    spikes.sort_by(|p, q| p.0.total_cmp(&q.0));
    let x = make_multi_path(&spikes, est.phi().grid())?;
    let paths: Vec<f64> = spikes.iter().filter(|s| s.1 > 0.0).map(|s| s.0).collect();
    let direct = spikes.iter().find(|s| s.1 > 0.0).ok_or_else(|| HarnessError::Config("all spikes are zero".into()))?.1;
    let tp = &cfg.three_path;
    method_table(&est, &x, direct, paths, &tp.snrs, tp.trials, seed, exec)
}

/// Backscattering of the diffuse scenario with amplitudes in sensor units.
pub fn diffuse_scene(d: &DiffuseConfig, scale: f64, grid: &DistanceGrid) -> Result<Backscattering> {
    let (d1, a1) = d.direct;
    let unit = DiffuseLobe { amplitude: 1.0, alpha: d.lobe.alpha, beta: d.lobe.beta, delta: d.lobe.delta };
    let lobe = unit.with_mass(d.lobe.mass * a1 * scale, d1, grid)?;
    let base = make_diffuse((d1, a1 * scale), &lobe, grid)?;
    let spec: Vec<(f64, f64)> = d.specular.iter().map(|&(d, x)| (d, x * scale)).collect();
    let spec = make_multi_path(&spec, grid)?;
    let sum = base.amplitudes().iter().zip(spec.amplitudes()).map(|(a, b)| a + b).collect();
    Ok(Backscattering::new(sum, *grid)?)
}

pub fn run_diffuse(cfg: &Config, seed: u64, exec: &Executor) -> Result<MethodTable> {
    let est = Estimators::new(cfg.sensor.dictionary()?, cfg.solver.clone())?;
    let d = &cfg.diffuse;
    let a = cfg.solver.amplitude_scale;
    if d.direct.1 <= 0.0 {
        return Err(HarnessError::Config("diffuse scenario needs a positive direct return".into()));
    }
    let x = diffuse_scene(d, a, est.phi().grid())?;
    method_table(&est, &x, d.direct.1 * a, vec![d.direct.0], &d.snrs, d.trials, seed, exec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub strength: f64,
    pub snr: f64,
    /// SRA first-peak error summary; `mean` is the cell MAE.
    pub sra: ErrorSummary,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub strengths: Vec<f64>,
    pub snrs: Vec<f64>,
    /// Row-major over strengths, then SNRs.
    pub cells: Vec<GridCell>,
}

impl GridTable {
    pub fn cell(&self, strength: usize, snr: usize) -> &GridCell {
        &self.cells[strength * self.snrs.len() + snr]
    }

    /// Mean cell MAE per strength and per SNR.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let (ns, nq) = (self.strengths.len(), self.snrs.len());
        let by_strength = (0..ns).map(|i| (0..nq).map(|j| self.cell(i, j).sra.mean).sum::<f64>() / nq as f64).collect();
        let by_snr = (0..nq).map(|j| (0..ns).map(|i| self.cell(i, j).sra.mean).sum::<f64>() / ns as f64).collect();
        (by_strength, by_snr)
    }

    /// Spearman correlation of the marginal MAE with strength and with `1 / SNR`.
    pub fn marginal_spearman(&self) -> (f64, f64) {
        let (by_strength, by_snr) = self.marginals();
        let inv: Vec<f64> = self.snrs.iter().map(|s| 1.0 / s).collect();
        (spearman(&self.strengths, &by_strength), spearman(&inv, &by_snr))
    }

    /// Spearman correlation over all cells, for reference.
    pub fn cell_spearman(&self) -> (f64, f64) {
        let mae: Vec<f64> = self.cells.iter().map(|c| c.sra.mean).collect();
        let s: Vec<f64> = self.cells.iter().map(|c| c.strength).collect();
        let q: Vec<f64> = self.cells.iter().map(|c| 1.0 / c.snr).collect();
        (spearman(&s, &mae), spearman(&q, &mae))
    }
}

/// Samples `(d1, d2)` on the grid: `d1` uniform in its range, the separation
/// uniform in `[sep_min, min(sep_max, d_max - d1)]`.
fn sample_pair(g: &GridConfig, grid: &DistanceGrid, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let snap = |d: f64| grid.distance(grid.nearest_index(d).unwrap_or(0));
    let d1 = snap(rng.gen_range(g.d1_range.0..=g.d1_range.1));
    let hi = g.separation_range.1.min(grid.d_max() - d1).max(g.separation_range.0);
    let sep = rng.gen_range(g.separation_range.0..=hi);
    let d2 = snap((d1 + sep).min(grid.d_max()));
    (d1, d2)
}

pub fn run_two_path_grid(cfg: &Config, seed: u64, exec: &Executor) -> Result<GridTable> {
    let est = Estimators::new(cfg.sensor.dictionary()?, cfg.solver.clone())?;
    let g = &cfg.two_path_grid;
    let grid = *est.phi().grid();
    let m = est.phi().freq().m();
    let a = cfg.solver.amplitude_scale;
    let n_cells = g.strengths.len() * g.snrs.len();
    if n_cells == 0 {
        return Ok(GridTable { strengths: g.strengths.clone(), snrs: g.snrs.clone(), cells: Vec::new() });
    }
    let per_cell = g.instances.div_ceil(n_cells).max(1);
    let errors = exec.map(n_cells * per_cell, |id| -> Result<Option<f64>> {
        let cell = id / per_cell;
        let (strength, snr) = (g.strengths[cell / g.snrs.len()], g.snrs[cell % g.snrs.len()]);
        let mut rng = instance_rng(seed, id as u64);
        let (d1, d2) = sample_pair(g, &grid, &mut rng);
        let x = make_multi_path(&[(d1, a), (d2, strength * a)], &grid)?;
        let sigma = sigma_for_snr(a, snr, m);
        let v = noisy(&synthesize(&x, est.phi())?, sigma, &mut rng);
        Ok(abs_error(est.sra(&v, sigma).estimate, d1))
    });
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
    let cells = errors
        .chunks(per_cell)
        .enumerate()
        .map(|(c, chunk)| GridCell {
            strength: g.strengths[c / g.snrs.len()],
            snr: g.snrs[c % g.snrs.len()],
            sra: ErrorSummary::from_errors(chunk.iter().copied()),
            instances: per_cell,
        })
        .collect();
    Ok(GridTable { strengths: g.strengths.clone(), snrs: g.snrs.clone(), cells })
}
