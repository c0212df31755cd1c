//! Sparse reflections analysis: recover a nonnegative, sparse backscattering
//! from one pixel measurement.
//!
//! The fast path minimizes `|x|_1` subject to `|W (Phi x - v)|_1 <= eps |v|_1`
//! with `W = C^{-1/2}`. Because `x >= 0` the objective is `1^T x`, and the L1
//! ball constraint expands into `2^{2m}` linear rows through the sign matrix
//! `Q`, giving an LP with `A = Q W Phi` and `b = Q W v + eps |v|_1 1`.
//!
//! The quadratically constrained variant (`|W (Phi x - v)|_2 <= eps |v|_2`)
//! is solved by a log-barrier interior point method and only serves as a
//! reference for validating the LP path.
//!
//! `W` is the inverse square root of the actual noise covariance, so the
//! admissible relative misfit `|Phi x - v| / |v|` shrinks with the noise level.
//! A zero covariance (noiseless data) is the limit `W -> infinity`, in which
//! the constraint becomes the exact fit `Phi x = v`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SraError};
use crate::lp::{solve_lp, LinearProgram, LpOptions, LpStatus};
use crate::measurement::{Backscattering, DictionaryMatrix, MeasurementVector, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    L1L1,
    L1L2Reference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SraConfig {
    pub epsilon: f64,
    pub noise: NoiseModel,
    pub variant: Variant,
    pub lp: LpOptions,
}

impl SraConfig {
    pub fn new(m: usize) -> Self {
        SraConfig {
            epsilon: 0.05,
            noise: NoiseModel::isotropic(m, 1.0),
            variant: Variant::L1L1,
            lp: LpOptions::default(),
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    fn validate(&self, m: usize, allow_zero_eps: bool) -> Result<()> {
        let lo_ok = if allow_zero_eps { self.epsilon >= 0.0 } else { self.epsilon > 0.0 };
        if !(lo_ok && self.epsilon < 1.0) {
            return Err(SraError::Config(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        if self.noise.m() != m {
            return Err(SraError::Dimension { expected: 2 * m, actual: self.noise.variances().len() });
        }
        if !self.noise.is_paired() {
            return Err(SraError::Config("noise covariance must be paired-diagonal".into()));
        }
        if !self.noise.is_positive() && !self.is_noiseless() {
            return Err(SraError::Config("noise covariance must be all positive or all zero".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise.variances().iter().all(|v| *v == 0.0)
    }

    /// Radius of the residual ball for a measurement with the given norm.
    fn radius(&self, v_norm: f64) -> f64 {
        if self.is_noiseless() {
            0.0
        } else {
            self.epsilon * v_norm
        }
    }
}

/// All sign vectors in `{-1, +1}^l`, one per row, in binary counting order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignConstraintMatrix {
    l: usize,
    entries: Vec<i8>,
}

impl SignConstraintMatrix {
    pub fn dim(&self) -> usize {
        self.l
    }

    pub fn rows(&self) -> usize {
        1 << self.l
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.entries[r * self.l..(r + 1) * self.l]
    }
}

pub fn build_q_matrix(l: usize) -> Result<SignConstraintMatrix> {
    if !(1..=16).contains(&l) {
        return Err(SraError::Config(format!("sign matrix dimension {l} outside 1..=16")));
    }
    let rows = 1usize << l;
    let mut entries = Vec::with_capacity(rows * l);
    for r in 0..rows {
        for c in 0..l {
            let bit = (r >> (l - 1 - c)) & 1;
            entries.push(if bit == 1 { 1 } else { -1 });
        }
    }
    Ok(SignConstraintMatrix { l, entries })
}

/// Whitened problem data `G = W Phi`, `g = W v`.
struct Whitened {
    rows: usize,
    cols: usize,
    g_mat: Vec<f64>,
    g_vec: Vec<f64>,
}

impl Whitened {
    fn new(v: &MeasurementVector, phi: &DictionaryMatrix, noise: &NoiseModel) -> Result<Self> {
        let rows = phi.rows();
        if v.real_view().len() != rows {
            return Err(SraError::Dimension { expected: rows, actual: v.real_view().len() });
        }
        let w = weights(noise)?;
        let cols = phi.cols();
        let mut g_mat = phi.entries().to_vec();
        for (r, wr) in w.iter().enumerate() {
            for e in &mut g_mat[r * cols..(r + 1) * cols] {
                *e *= wr;
            }
        }
        let g_vec = v.real_view().iter().zip(&w).map(|(a, b)| a * b).collect();
        Ok(Whitened { rows, cols, g_mat, g_vec })
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let row = &self.g_mat[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.g_vec[r]
            })
            .collect()
    }

    /// LP rows `Q G x <= Q g + radius`, kept in factored form.
    fn l1_ball_lp(&self, radius: f64) -> Result<LinearProgram> {
        let q = build_q_matrix(self.rows)?;
        let left: Vec<f64> = q.entries.iter().map(|&e| e as f64).collect();
        let b = (0..q.rows())
            .map(|r| radius + q.row(r).iter().zip(&self.g_vec).map(|(&s, g)| s as f64 * g).sum::<f64>())
            .collect();
        LinearProgram::factored(vec![1.0; self.cols], left, self.g_mat.clone(), self.rows, b)
    }
}

/// Diagonal of `C^{-1/2}`; unit weights for a zero covariance, where the
/// radius collapses to zero and the weighting no longer matters.
fn weights(noise: &NoiseModel) -> Result<Vec<f64>> {
    if noise.variances().iter().all(|v| *v == 0.0) {
        return Ok(vec![1.0; noise.variances().len()]);
    }
    noise.inv_sqrt()
}

pub fn assemble_l1l1(v: &MeasurementVector, phi: &DictionaryMatrix, cfg: &SraConfig) -> Result<LinearProgram> {
    cfg.validate(phi.freq().m(), true)?;
    let norm = v.l1_norm();
    if norm == 0.0 {
        return Err(SraError::ZeroMeasurement);
    }
    Whitened::new(v, phi, &cfg.noise)?.l1_ball_lp(cfg.radius(norm))
}

/// Solves the configured variant.
pub fn solve_sra(v: &MeasurementVector, phi: &DictionaryMatrix, cfg: &SraConfig) -> Result<Backscattering> {
    match cfg.variant {
        Variant::L1L1 => solve_sra_l1l1(v, phi, cfg),
        Variant::L1L2Reference => solve_sra_l2_reference(v, phi, cfg),
    }
}

fn solve_sra_l1l1(v: &MeasurementVector, phi: &DictionaryMatrix, cfg: &SraConfig) -> Result<Backscattering> {
    let lp = assemble_l1l1(v, phi, cfg)?;
    let sol = solve_lp(&lp, &cfg.lp);
    match sol.status {
        LpStatus::Optimal => Ok(Backscattering::from_solver(sol.x, *phi.grid())),
        status => Err(SraError::Lp(status)),
    }
}

/// Solves the L1L1 program, doubling `epsilon` after each infeasible attempt
/// while it stays below 1. Returns the solution and the tolerance that
/// produced it.
pub fn solve_sra_relaxed(v: &MeasurementVector, phi: &DictionaryMatrix, cfg: &SraConfig) -> Result<(Backscattering, f64)> {
    let mut cfg = cfg.clone();
    loop {
        match solve_sra(v, phi, &cfg) {
            Err(SraError::Lp(LpStatus::Infeasible)) if cfg.epsilon > 0.0 && 2.0 * cfg.epsilon < 1.0 => {
                cfg.epsilon *= 2.0;
            }
            other => return other.map(|x| (x, cfg.epsilon)),
        }
    }
}

/// `|W (Phi x - v)|_1` with the weighting the solver uses.
pub fn weighted_l1_residual(
    v: &MeasurementVector,
    phi: &DictionaryMatrix,
    x: &Backscattering,
    noise: &NoiseModel,
) -> Result<f64> {
    let w = Whitened::new(v, phi, noise)?;
    Ok(w.residual(x.amplitudes()).iter().map(|e| e.abs()).sum())
}

/// `|W (Phi x - v)|_2`.
pub fn weighted_l2_residual(
    v: &MeasurementVector,
    phi: &DictionaryMatrix,
    x: &Backscattering,
    noise: &NoiseModel,
) -> Result<f64> {
    let w = Whitened::new(v, phi, noise)?;
    Ok(w.residual(x.amplitudes()).iter().map(|e| e * e).sum::<f64>().sqrt())
}

/// Stopping rule of the reference solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub rel_gap: f64,
    pub max_newton: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { rel_gap: 1e-7, max_newton: 500 }
    }
}

pub fn solve_sra_l2_reference(v: &MeasurementVector, phi: &DictionaryMatrix, cfg: &SraConfig) -> Result<Backscattering> {
    solve_sra_l2_reference_with(v, phi, cfg, &ReferenceOptions::default())
}

/// Log-barrier method on the dual of `min 1^T x  s.t.  x >= 0, |G x - g|_2 <= r`,
/// which is `max -g^T y - r |y|_2  s.t.  G^T y >= -1` over `y` in `R^{2m}`.
///
/// Newton steps are `2m x 2m` systems. At the center for barrier weight `t`
/// the multipliers `x_j = 1 / (t (1 + G_j^T y))` satisfy `|G x - g|_2 = r`
/// exactly and leave a duality gap of `n / t`, so they are returned as the
/// primal solution.
pub fn solve_sra_l2_reference_with(
    v: &MeasurementVector,
    phi: &DictionaryMatrix,
    cfg: &SraConfig,
    opts: &ReferenceOptions,
) -> Result<Backscattering> {
    cfg.validate(phi.freq().m(), true)?;
    if v.is_zero() {
        return Err(SraError::ZeroMeasurement);
    }
    let wp = Whitened::new(v, phi, &cfg.noise)?;
    let radius = cfg.radius(v.l2_norm());
    let n = wp.cols;

    if radius == 0.0 {
        // Equality constrained: the ball degenerates to G x = g.
        let lp = wp.l1_ball_lp(0.0)?;
        let sol = solve_lp(&lp, &cfg.lp);
        return match sol.status {
            LpStatus::Optimal => Ok(Backscattering::from_solver(sol.x, *phi.grid())),
            s => Err(SraError::Lp(s)),
        };
    }

    let k = wp.rows;
    let g = DVector::from_column_slice(&wp.g_vec);
    if g.norm() <= radius {
        return Ok(Backscattering::zeros(*phi.grid()));
    }
    // G^T y for every column
    let project = |y: &DVector<f64>| -> Vec<f64> {
        (0..n).map(|j| (0..k).map(|r| wp.g_mat[r * n + j] * y[r]).sum()).collect()
    };
    let barrier = |y: &DVector<f64>, t: f64| -> Option<f64> {
        let mut f = t * (g.dot(y) + radius * y.norm());
        for gy in project(y) {
            let s = 1.0 + gy;
            if s <= 0.0 {
                return None;
            }
            f -= s.ln();
        }
        Some(f)
    };

    // Start on the ray -g, well inside the feasible set.
    let dir = -&g / g.norm();
    let reach = project(&dir).iter().fold(0.0f64, |m, a| m.max(-a));
    let mut y = dir * (0.5 / reach.max(1e-12));
    let mut t = 1.0 / g.norm();
    let mut newton = 0;
    let mut x = vec![0.0; n];
    loop {
        // Centering.
        let mut prev_dec = f64::INFINITY;
        loop {
            if newton >= opts.max_newton {
                return Err(SraError::Convergence(format!(
                    "barrier method hit {} Newton steps",
                    opts.max_newton
                )));
            }
            let slack: Vec<f64> = project(&y).iter().map(|a| 1.0 + a).collect();
            let yn = y.norm();
            let yhat = &y / yn;
            let mut grad = (&g + &yhat * radius) * t;
            let mut hess = (DMatrix::identity(k, k) - &yhat * yhat.transpose()) * (t * radius / yn);
            for j in 0..n {
                let inv = 1.0 / slack[j];
                for a in 0..k {
                    let ga = wp.g_mat[a * n + j] * inv;
                    grad[a] -= ga;
                    for b in a..k {
                        hess[(a, b)] += ga * wp.g_mat[b * n + j] * inv;
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    hess[(a, b)] = hess[(b, a)];
                }
            }
            let dy = hess
                .lu()
                .solve(&-&grad)
                .ok_or_else(|| SraError::Convergence("singular barrier Hessian".into()))?;
            let slope = grad.dot(&dy);
            newton += 1;
            let dec = -slope / 2.0;
            // quadratic convergence has stalled at round-off level
            let stalled = dec <= 1e-6 && dec >= prev_dec / 2.0;
            prev_dec = dec;
            if dec <= 1e-10 || stalled {
                x = slack.iter().map(|s| 1.0 / (t * s)).collect();
                break;
            }
            let f0 = barrier(&y, t).expect("iterate stays interior");
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial = &y + &dy * step;
                if let Some(f1) = barrier(&trial, t) {
                    if f1 <= f0 + 0.25 * step * slope {
                        y = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            // a step lost entirely to rounding counts as converged
            if !accepted || (&dy * step).norm() <= f64::EPSILON * y.norm() {
                x = slack.iter().map(|s| 1.0 / (t * s)).collect();
                break;
            }
            if y.norm() > 1e12 {
                return Err(SraError::Convergence("dual is unbounded: residual ball unreachable".into()));
            }
        }
        let objective: f64 = x.iter().sum();
        if n as f64 / t <= opts.rel_gap * objective.max(f64::MIN_POSITIVE) {
            break;
        }
        t *= 10.0;
    }
    let x = polish(&wp, radius, &y, &x).unwrap_or(x);
    Ok(Backscattering::from_solver(x, *phi.grid()))
}

/// Newton refinement of the optimality conditions `G_S^T y = -1` and
/// `G_S x_S - g = r y / |y|`. Candidate supports are the `s` largest entries
/// of the barrier point for `s = 1..=2m`; the first one whose refined point is
/// optimal for the full problem wins.
fn polish(wp: &Whitened, radius: f64, y0: &DVector<f64>, x0: &[f64]) -> Option<Vec<f64>> {
    let (k, n) = (wp.rows, wp.cols);
    let total: f64 = x0.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| x0[*b].total_cmp(&x0[*a]));
    (1..=k.min(n)).find_map(|s| {
        let mut support = order[..s].to_vec();
        support.sort_unstable();
        refine(wp, radius, y0, x0, &support, total)
    })
}

fn refine(wp: &Whitened, radius: f64, y0: &DVector<f64>, x0: &[f64], support: &[usize], total: f64) -> Option<Vec<f64>> {
    let (k, n, s) = (wp.rows, wp.cols, support.len());
    let gcol = |r: usize, j: usize| wp.g_mat[r * n + j];
    let slack = |y: &DVector<f64>, j: usize| 1.0 + (0..k).map(|r| gcol(r, j) * y[r]).sum::<f64>();
    let mut y = y0.clone();
    let mut xs = DVector::from_iterator(s, support.iter().map(|&j| x0[j]));
    let mut converged = false;
    for _ in 0..50 {
        let yn = y.norm();
        let yhat = &y / yn;
        let mut f = DVector::zeros(s + k);
        let mut jac = DMatrix::zeros(s + k, k + s);
        for (c, &j) in support.iter().enumerate() {
            f[c] = slack(&y, j);
            for r in 0..k {
                jac[(c, r)] = gcol(r, j);
            }
        }
        let proj = (DMatrix::identity(k, k) - &yhat * yhat.transpose()) * (radius / yn);
        for r in 0..k {
            f[s + r] = support.iter().enumerate().map(|(c, &j)| gcol(r, j) * xs[c]).sum::<f64>()
                - wp.g_vec[r]
                - radius * yhat[r];
            for q in 0..k {
                jac[(s + r, q)] = -proj[(r, q)];
            }
            for (c, &j) in support.iter().enumerate() {
                jac[(s + r, k + c)] = gcol(r, j);
            }
        }
        if f.amax() <= 1e-12 * (1.0 + total) {
            converged = true;
            break;
        }
        let step = jac.lu().solve(&-f)?;
        y += step.rows(0, k);
        xs += step.rows(k, s);
    }
    if !converged || xs.iter().any(|a| *a <= 0.0) || (0..n).any(|j| slack(&y, j) < -1e-9) {
        return None;
    }
    // (x, y) is primal and dual feasible; a zero gap certifies optimality
    let primal = xs.sum();
    let dual = -wp.g_vec.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>() - radius * y.norm();
    if (primal - dual).abs() > 1e-9 * (1.0 + primal) {
        return None;
    }
    let mut x = vec![0.0; n];
    for (c, &j) in support.iter().enumerate() {
        x[j] = xs[c];
    }
    Some(x)
}

/// Sparsest nonnegative backscattering satisfying the quadratic residual bound,
/// by exhaustive search over supports of size at most three.
///
/// Exponential in the support size; only for grids of at most 25 points.
pub fn l0_oracle(v: &MeasurementVector, phi_small: &DictionaryMatrix, cfg: &SraConfig) -> Result<Backscattering> {
    const MAX_GRID: usize = 25;
    const MAX_SUPPORT: usize = 3;
    let n = phi_small.cols();
    if n > MAX_GRID {
        return Err(SraError::GridTooLarge(n));
    }
    cfg.validate(phi_small.freq().m(), true)?;
    let grid = *phi_small.grid();
    if v.is_zero() {
        return Ok(Backscattering::zeros(grid));
    }
    let wp = Whitened::new(v, phi_small, &cfg.noise)?;
    let bound = cfg.radius(v.l2_norm()).powi(2).max(1e-20 * v.l2_norm().powi(2));
    let g = DVector::from_column_slice(&wp.g_vec);

    for size in 1..=MAX_SUPPORT {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        for support in combinations(n, size) {
            let a = DMatrix::from_fn(wp.rows, size, |r, c| wp.g_mat[r * n + support[c]]);
            let Ok(z) = a.clone().svd(true, true).solve(&g, 1e-12) else {
                continue;
            };
            if z.iter().any(|zi| *zi <= 0.0) {
                continue;
            }
            let res = (a * &z - &g).norm_squared();
            if res <= bound && best.as_ref().is_none_or(|b| res < b.0) {
                best = Some((res, support, z.iter().copied().collect()));
            }
        }
        if let Some((_, support, z)) = best {
            let mut amps = vec![0.0; n];
            for (j, a) in support.into_iter().zip(z) {
                amps[j] = a;
            }
            return Backscattering::new(amps, grid);
        }
    }
    Err(SraError::Config(format!(
        "no support of size <= {MAX_SUPPORT} satisfies the residual bound"
    )))
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut done = k > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = idx.clone();
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{build_phi, make_multi_path, synthesize, DistanceGrid, FrequencyConfig};

    fn setup() -> (DictionaryMatrix, SraConfig) {
        let phi = build_phi(&DistanceGrid::default(), &FrequencyConfig::default());
        (phi, SraConfig::new(3))
    }

    #[test]
    fn q_matrix_small_and_symmetric() {
        let q1 = build_q_matrix(1).unwrap();
        assert_eq!(q1.row(0), &[-1]);
        assert_eq!(q1.row(1), &[1]);
        let q6 = build_q_matrix(6).unwrap();
        assert_eq!(q6.rows(), 64);
        let mut seen = std::collections::HashSet::new();
        for r in 0..64 {
            let row = q6.row(r).to_vec();
            let neg: Vec<i8> = row.iter().map(|s| -s).collect();
            assert!((0..64).any(|o| q6.row(o) == neg.as_slice()));
            assert!(seen.insert(row));
        }
        assert!(build_q_matrix(0).is_err());
        assert!(build_q_matrix(17).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).count(), 6);
        assert_eq!(combinations(5, 3).last().unwrap(), vec![2, 3, 4]);
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn assembled_lp_shape_and_scaling() {
        let (phi, cfg) = setup();
        let x = make_multi_path(&[(100.0, 1.0), (240.0, 0.7)], phi.grid()).unwrap();
        let v = synthesize(&x, &phi).unwrap();
        let lp = assemble_l1l1(&v, &phi, &cfg).unwrap();
        assert_eq!((lp.rows(), lp.cols()), (64, 431));
        let lp2 = assemble_l1l1(&v.scaled(2.5), &phi, &cfg).unwrap();
        assert_eq!(lp.a(), lp2.a());
        for (b1, b2) in lp.b().iter().zip(lp2.b()) {
            assert!((2.5 * b1 - b2).abs() < 1e-12 * b2.abs().max(1.0));
        }
    }

    #[test]
    fn zero_epsilon_forces_exact_fit() {
        let (phi, cfg) = setup();
        let cfg = cfg.with_epsilon(0.0);
        let x = make_multi_path(&[(120.0, 1.0), (260.0, 2.0)], phi.grid()).unwrap();
        let v = synthesize(&x, &phi).unwrap();
        let lp = assemble_l1l1(&v, &phi, &cfg).unwrap();
        // every row is a signed residual bound with zero slack
        let at_truth: Vec<f64> = (0..lp.rows())
            .map(|i| lp.a_row(i).iter().zip(x.amplitudes()).map(|(a, b)| a * b).sum::<f64>() - lp.b()[i])
            .collect();
        assert!(at_truth.iter().all(|s| s.abs() < 1e-9));
        let sol = solve_sra(&v, &phi, &cfg).unwrap();
        let fit = weighted_l1_residual(&v, &phi, &sol, &cfg.noise).unwrap();
        assert!(fit < 1e-7, "residual {fit}");
    }

    #[test]
    fn zero_measurement_rejected() {
        let (phi, cfg) = setup();
        let v = MeasurementVector::zeros(3);
        assert!(matches!(assemble_l1l1(&v, &phi, &cfg), Err(SraError::ZeroMeasurement)));
        assert!(matches!(solve_sra_l2_reference(&v, &phi, &cfg), Err(SraError::ZeroMeasurement)));
    }

    #[test]
    fn unpaired_noise_rejected() {
        let (phi, cfg) = setup();
        let v = synthesize(&make_multi_path(&[(100.0, 1.0)], phi.grid()).unwrap(), &phi).unwrap();
        let bad = cfg.with_noise(NoiseModel::diagonal(vec![1.0, 1.0, 1.0, 2.0, 1.0, 1.0]).unwrap());
        assert!(assemble_l1l1(&v, &phi, &bad).is_err());
    }

    #[test]
    fn noise_level_sets_tolerance() {
        let (phi, cfg) = setup();
        let v = synthesize(&make_multi_path(&[(100.0, 1.0), (140.0, 0.7)], phi.grid()).unwrap(), &phi).unwrap();
        let mixed = cfg.clone().with_noise(NoiseModel::diagonal(vec![0.0, 1.0, 1.0, 0.0, 1.0, 1.0]).unwrap());
        assert!(assemble_l1l1(&v, &phi, &mixed).is_err());
        // a noisier covariance admits a larger misfit, so the optimum cannot grow
        let mut last = f64::INFINITY;
        for sigma in [0.0, 0.01, 0.1, 1.0] {
            let x = solve_sra(&v, &phi, &cfg.clone().with_noise(NoiseModel::isotropic(3, sigma))).unwrap();
            assert!(x.l1_norm() <= last + 1e-9);
            last = x.l1_norm();
        }
    }

    #[test]
    fn relaxed_solve_recovers_from_infeasibility() {
        let (phi, cfg) = setup();
        let cfg = cfg.with_noise(NoiseModel::isotropic(3, 0.1));
        let clean = synthesize(&make_multi_path(&[(100.0, 1.0)], phi.grid()).unwrap(), &phi).unwrap();
        let mut relaxed = 0;
        for seed in 0..20 {
            let v = crate::measurement::add_noise(&clean, &NoiseModel::isotropic(3, 0.2), seed);
            let strict = solve_sra(&v, &phi, &cfg);
            let (x, eps) = match solve_sra_relaxed(&v, &phi, &cfg) {
                Ok(r) => r,
                Err(e) => {
                    assert!(matches!(e, SraError::Lp(LpStatus::Infeasible)), "seed {seed}: {e}");
                    assert!(strict.is_err());
                    continue;
                }
            };
            if eps > cfg.epsilon {
                relaxed += 1;
                assert!(matches!(strict, Err(SraError::Lp(LpStatus::Infeasible))));
            } else {
                assert_eq!(strict.unwrap().amplitudes(), x.amplitudes());
            }
            let fit = weighted_l1_residual(&v, &phi, &x, &cfg.noise).unwrap();
            assert!(fit <= eps * v.l1_norm() * (1.0 + 1e-7) + 1e-9);
        }
        assert!(relaxed > 0);
    }

    #[test]
    fn noiseless_single_path_exact() {
        let (phi, cfg) = setup();
        let cfg = cfg.with_noise(NoiseModel::isotropic(3, 0.0));
        assert!(cfg.is_noiseless());
        for d in [20.0, 77.0, 150.0, 333.0, 450.0] {
            let x = make_multi_path(&[(d, 1.3)], phi.grid()).unwrap();
            let v = synthesize(&x, &phi).unwrap();
            let sol = solve_sra(&v, &phi, &cfg).unwrap();
            let first = sol.support(0.01)[0];
            assert_eq!(phi.grid().distance(first), d);
        }
    }

    #[test]
    fn reference_agrees_on_single_path() {
        let (phi, cfg) = setup();
        let cfg = cfg.with_noise(NoiseModel::isotropic(3, 0.05));
        for d in [45.0, 210.0, 390.0] {
            let x = make_multi_path(&[(d, 1.0)], phi.grid()).unwrap();
            let v = synthesize(&x, &phi).unwrap();
            let lp = solve_sra(&v, &phi, &cfg).unwrap();
            let reference = solve_sra_l2_reference(&v, &phi, &cfg).unwrap();
            let a = phi.grid().distance(lp.support(0.01)[0]);
            let b = phi.grid().distance(reference.support(0.01)[0]);
            assert!((a - b).abs() <= phi.grid().step(), "{a} vs {b}");
            let l2 = weighted_l2_residual(&v, &phi, &reference, &cfg.noise).unwrap();
            assert!(l2 <= cfg.epsilon * v.l2_norm() * (1.0 + 1e-9));
            let l1 = weighted_l1_residual(&v, &phi, &lp, &cfg.noise).unwrap();
            assert!(l1 <= cfg.epsilon * v.l1_norm() * (1.0 + 1e-7));
        }
    }

    #[test]
    fn reference_with_zero_epsilon_matches_lp_support() {
        let (phi, cfg) = setup();
        let cfg = cfg.with_epsilon(0.0);
        let x = make_multi_path(&[(100.0, 1.0), (200.0, 2.0), (300.0, 3.0)], phi.grid()).unwrap();
        let v = synthesize(&x, &phi).unwrap();
        let a = solve_sra(&v, &phi, &cfg).unwrap();
        let b = solve_sra_l2_reference(&v, &phi, &cfg).unwrap();
        assert_eq!(a.support(1e-6), b.support(1e-6));
        assert_eq!(a.support(1e-6), x.support(0.0));
    }

    #[test]
    fn l0_oracle_cases() {
        let grid = DistanceGrid::new(20.0, 210.0, 10.0).unwrap();
        assert_eq!(grid.len(), 20);
        let phi = build_phi(&grid, &FrequencyConfig::default());
        let cfg = SraConfig::new(3);
        let x = make_multi_path(&[(60.0, 1.0), (150.0, 0.8)], &grid).unwrap();
        let v = synthesize(&x, &phi).unwrap();
        assert_eq!(l0_oracle(&v, &phi, &cfg).unwrap().support(0.0), x.support(0.0));
        let single = synthesize(&make_multi_path(&[(100.0, 2.0)], &grid).unwrap(), &phi).unwrap();
        assert_eq!(l0_oracle(&single, &phi, &cfg).unwrap().support(0.0).len(), 1);
        let zero = l0_oracle(&MeasurementVector::zeros(3), &phi, &cfg).unwrap();
        assert!(zero.support(0.0).is_empty());

        let big = build_phi(&DistanceGrid::default(), &FrequencyConfig::default());
        assert!(matches!(l0_oracle(&v, &big, &cfg), Err(SraError::GridTooLarge(431))));
    }
}
