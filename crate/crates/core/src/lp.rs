//! Dense simplex solver for `min c^T x  s.t.  A x <= b, x >= 0`.
//!
//! The problems produced by the SRA formulation are small (64 rows, a few
//! hundred columns) and completely dense, so the solver works on a full
//! tableau. The slack basis is always dual feasible once negative costs are
//! clipped, which lets a dual simplex pass find a primal feasible vertex
//! without artificial variables. A primal simplex pass then restores the true
//! costs. For nonnegative costs (the SRA case) the second pass is a no-op.
//!
//! Pivoting is fully deterministic: ties break on the smallest index and a
//! fixed cost perturbation plus a Bland fallback guard against cycling.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SraError};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    /// Dense `A`, row-major; materialized lazily for factored programs.
    a: OnceLock<Vec<f64>>,
    b: Vec<f64>,
    factors: Option<Factors>,
}

impl LinearProgram {
    /// `a` is row-major with `b.len()` rows and `objective.len()` columns.
    pub fn new(objective: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let (n, r) = (objective.len(), b.len());
        if n == 0 {
            return Err(SraError::Config("linear program has no variables".into()));
        }
        if a.len() != n * r {
            return Err(SraError::Dimension { expected: n * r, actual: a.len() });
        }
        if objective.iter().chain(&a).chain(&b).any(|v| !v.is_finite()) {
            return Err(SraError::Config("linear program has non-finite data".into()));
        }
        Ok(LinearProgram { objective, a: OnceLock::from(a), b, factors: None })
    }

    /// `A = left * right` (`r x k` times `k x n`, both row-major). Keeping the
    /// factors lets the solver work on `r x (k + r)` state instead of the
    /// full `r x (n + r)` tableau.
    pub fn factored(objective: Vec<f64>, left: Vec<f64>, right: Vec<f64>, k: usize, b: Vec<f64>) -> Result<Self> {
        let (n, r) = (objective.len(), b.len());
        if n == 0 {
            return Err(SraError::Config("linear program has no variables".into()));
        }
        if k == 0 || left.len() != r * k {
            return Err(SraError::Dimension { expected: r * k, actual: left.len() });
        }
        if right.len() != k * n {
            return Err(SraError::Dimension { expected: k * n, actual: right.len() });
        }
        if objective.iter().chain(&left).chain(&right).chain(&b).any(|v| !v.is_finite()) {
            return Err(SraError::Config("linear program has non-finite data".into()));
        }
        Ok(LinearProgram { objective, a: OnceLock::new(), b, factors: Some(Factors { k, left, right }) })
    }

    /// Same program without the factorization.
    pub fn to_dense(&self) -> Self {
        LinearProgram { objective: self.objective.clone(), a: OnceLock::from(self.a().to_vec()), b: self.b.clone(), factors: None }
    }

    pub fn is_factored(&self) -> bool {
        self.factors.is_some()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn a(&self) -> &[f64] {
        self.a.get_or_init(|| {
            let f = self.factors.as_ref().expect("dense programs store A");
            let (n, r) = (self.cols(), self.rows());
            let mut a = vec![0.0; r * n];
            for (i, out) in a.chunks_exact_mut(n).enumerate() {
                for c in 0..f.k {
                    axpy(out, &f.right[c * n..(c + 1) * n], -f.left[i * f.k + c]);
                }
            }
            a
        })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a_row(&self, i: usize) -> &[f64] {
        let n = self.cols();
        &self.a()[i * n..(i + 1) * n]
    }

    /// Entry `A[i, j]` without materializing `A`.
    fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.factors {
            Some(f) => {
                let n = self.cols();
                (0..f.k).map(|c| f.left[i * f.k + c] * f.right[c * n + j]).sum()
            }
            None => self.a()[i * self.cols() + j],
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.factors {
            Some(f) => {
                let rx: Vec<f64> = f.right.chunks_exact(self.cols()).map(|row| dot(row, x)).collect();
                f.left.chunks_exact(f.k).map(|l| dot(l, &rx)).collect()
            }
            None => (0..self.rows()).map(|i| dot(self.a_row(i), x)).collect(),
        }
    }

    /// Largest violation of `A x <= b` and `x >= 0`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        let rows = ax.iter().zip(&self.b).map(|(a, b)| a - b);
        let bounds = x.iter().map(|v| -v);
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Absolute feasibility tolerance; `None` uses `1e-8 (1 + |b|_inf)`.
    pub tol_feas: Option<f64>,
    pub tol_opt: f64,
    /// Pivot limit; `None` uses `10 (n + r)`.
    pub max_iter: Option<usize>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { tol_feas: None, tol_opt: 1e-8, max_iter: None }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

pub fn solve_lp(lp: &LinearProgram, opts: &LpOptions) -> LpSolution {
    match &lp.factors {
        Some(f) => run(lp, opts, FactoredBody::new(f, lp.rows())),
        None => run(lp, opts, DenseBody::new(lp)),
    }
}

fn run<B: Body>(lp: &LinearProgram, opts: &LpOptions, body: B) -> LpSolution {
    let (n, r) = (lp.cols(), lp.rows());
    let b_inf = lp.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_feas = opts.tol_feas.unwrap_or(1e-8 * (1.0 + b_inf));
    let max_iter = opts.max_iter.unwrap_or(10 * (n + r));

    let mut t = Tableau::new(lp, body);
    let c_scale = lp.objective.iter().fold(1.0f64, |m, v| m.max(v.abs()));

    // Dual pass on clipped, slightly perturbed costs.
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for (j, d) in t.d.iter_mut().enumerate() {
        h ^= h << 13;
        h ^= h >> 7;
        h ^= h << 17;
        let u = 1.0 + (h >> 11) as f64 / (1u64 << 53) as f64;
        let base = if j < n { lp.objective[j].max(0.0) } else { 0.0 };
        *d = base + 1e-11 * c_scale * u;
    }
    let dual = t.dual_simplex(tol_feas, max_iter);
    if let Some(status) = dual {
        return t.finish(lp, status, tol_feas);
    }

    // Primal pass on the true costs from the feasible vertex.
    t.reset_costs(lp);
    let status = t.primal_simplex(opts.tol_opt, max_iter);
    t.finish(lp, status, tol_feas)
}

/// Storage of `B^{-1} [A I]`.
trait Body {
    fn row_into(&self, p: usize, out: &mut [f64]);
    fn col_into(&self, q: usize, out: &mut [f64]);
    /// Eliminates column `q` using pivot row `p`; `col` is column `q` before the pivot.
    fn pivot(&mut self, p: usize, col: &[f64]);
}

struct DenseBody {
    cols: usize,
    body: Vec<f64>,
}

impl DenseBody {
    fn new(lp: &LinearProgram) -> Self {
        let (n, r) = (lp.cols(), lp.rows());
        let cols = n + r;
        let mut body = vec![0.0; r * cols];
        for i in 0..r {
            body[i * cols..i * cols + n].copy_from_slice(lp.a_row(i));
            body[i * cols + n + i] = 1.0;
        }
        DenseBody { cols, body }
    }
}

impl Body for DenseBody {
    fn row_into(&self, p: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.body[p * self.cols..(p + 1) * self.cols]);
    }

    fn col_into(&self, q: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.body[i * self.cols + q];
        }
    }

    fn pivot(&mut self, p: usize, col: &[f64]) {
        let cols = self.cols;
        let inv = 1.0 / col[p];
        for v in &mut self.body[p * cols..(p + 1) * cols] {
            *v *= inv;
        }
        let (before, rest) = self.body.split_at_mut(p * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for (row, &f) in before.chunks_exact_mut(cols).zip(col) {
            axpy(row, prow, f);
        }
        for (row, &f) in after.chunks_exact_mut(cols).zip(&col[p + 1..]) {
            axpy(row, prow, f);
        }
    }
}

/// `A = L R` with `L` of size `r x k` and `R` of size `k x n`.
#[derive(Debug, Clone, PartialEq)]
struct Factors {
    k: usize,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Keeps `B^{-1} L` (`r x k`) and `B^{-1}` (`r x r`) instead of the full
/// tableau; structural rows and columns are formed on demand.
struct FactoredBody<'a> {
    f: &'a Factors,
    r: usize,
    n: usize,
    /// `[B^{-1} L | B^{-1}]`, row-major with `k + r` columns.
    small: Vec<f64>,
}

impl<'a> FactoredBody<'a> {
    fn new(f: &'a Factors, r: usize) -> Self {
        let w = f.k + r;
        let mut small = vec![0.0; r * w];
        for i in 0..r {
            small[i * w..i * w + f.k].copy_from_slice(&f.left[i * f.k..(i + 1) * f.k]);
            small[i * w + f.k + i] = 1.0;
        }
        FactoredBody { f, r, n: f.right.len() / f.k, small }
    }
}

impl Body for FactoredBody<'_> {
    fn row_into(&self, p: usize, out: &mut [f64]) {
        let (k, n, w) = (self.f.k, self.n, self.f.k + self.r);
        let srow = &self.small[p * w..(p + 1) * w];
        let (structural, slack) = out.split_at_mut(n);
        structural.fill(0.0);
        for (c, &m) in srow[..k].iter().enumerate() {
            if m != 0.0 {
                axpy(structural, &self.f.right[c * n..(c + 1) * n], -m);
            }
        }
        slack.copy_from_slice(&srow[k..]);
    }

    fn col_into(&self, q: usize, out: &mut [f64]) {
        let (k, n, w) = (self.f.k, self.n, self.f.k + self.r);
        for (i, o) in out.iter_mut().enumerate() {
            let srow = &self.small[i * w..(i + 1) * w];
            *o = if q < n {
                (0..k).map(|c| srow[c] * self.f.right[c * n + q]).sum()
            } else {
                srow[k + q - n]
            };
        }
    }

    fn pivot(&mut self, p: usize, col: &[f64]) {
        let w = self.f.k + self.r;
        let inv = 1.0 / col[p];
        for v in &mut self.small[p * w..(p + 1) * w] {
            *v *= inv;
        }
        let (before, rest) = self.small.split_at_mut(p * w);
        let (prow, after) = rest.split_at_mut(w);
        for (row, &f) in before.chunks_exact_mut(w).zip(col) {
            axpy(row, prow, f);
        }
        for (row, &f) in after.chunks_exact_mut(w).zip(&col[p + 1..]) {
            axpy(row, prow, f);
        }
    }
}

/// `y -= f x`.
#[inline]
fn axpy(y: &mut [f64], x: &[f64], f: f64) {
    if f == 0.0 {
        return;
    }
    for (a, b) in y.iter_mut().zip(x) {
        *a -= f * b;
    }
}

struct Tableau<B> {
    rows: usize,
    cols: usize,
    structural: usize,
    body: B,
    rhs: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    iterations: usize,
    row_buf: Vec<f64>,
    col_buf: Vec<f64>,
}

impl<B: Body> Tableau<B> {
    fn new(lp: &LinearProgram, body: B) -> Self {
        let (n, r) = (lp.cols(), lp.rows());
        let cols = n + r;
        let mut is_basic = vec![false; cols];
        for flag in &mut is_basic[n..] {
            *flag = true;
        }
        Tableau {
            rows: r,
            cols,
            structural: n,
            body,
            rhs: lp.b.clone(),
            d: vec![0.0; cols],
            basis: (n..cols).collect(),
            is_basic,
            iterations: 0,
            row_buf: vec![0.0; cols],
            col_buf: vec![0.0; r],
        }
    }

    /// Pivots on `(p, q)`; `row_buf` must hold row `p`.
    fn pivot(&mut self, p: usize, q: usize) {
        self.body.col_into(q, &mut self.col_buf);
        let alpha = self.row_buf[q];
        let theta = self.rhs[p] / alpha;
        for (i, (r, c)) in self.rhs.iter_mut().zip(&self.col_buf).enumerate() {
            if i == p {
                *r = theta;
            } else {
                *r -= c * theta;
            }
        }
        let f = self.d[q] / alpha;
        axpy(&mut self.d, &self.row_buf, f);
        self.d[q] = 0.0;
        self.body.pivot(p, &self.col_buf);

        let leaving = self.basis[p];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[p] = q;
        self.iterations += 1;
    }

    /// Returns `None` once the basis is primal feasible.
    fn dual_simplex(&mut self, tol_feas: f64, max_iter: usize) -> Option<LpStatus> {
        let mut streak = 0;
        loop {
            let bland = streak > DEGENERATE_STREAK;
            let mut p = None;
            let mut worst = -tol_feas;
            for i in 0..self.rows {
                let v = self.rhs[i];
                if v < -tol_feas {
                    let better = match p {
                        None => true,
                        Some(pp) if bland => self.basis[i] < self.basis[pp],
                        Some(_) => v < worst,
                    };
                    if better {
                        p = Some(i);
                        worst = v;
                    }
                }
            }
            let p = p?;
            if self.iterations >= max_iter {
                return Some(LpStatus::IterationLimit);
            }

            self.body.row_into(p, &mut self.row_buf);
            let row = &self.row_buf;
            let mut q = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_mag = 0.0;
            for j in 0..self.cols {
                let a = row[j];
                if self.is_basic[j] || a >= -PIVOT_TOL {
                    continue;
                }
                let ratio = self.d[j].max(0.0) / -a;
                let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                if q.is_none() || (!tie && ratio < best_ratio) || (tie && !bland && -a > best_mag) {
                    q = Some(j);
                    best_ratio = ratio;
                    best_mag = -a;
                }
            }
            let Some(q) = q else {
                return Some(LpStatus::Infeasible);
            };
            if best_ratio <= 1e-14 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(p, q);
        }
    }

    fn reset_costs(&mut self, lp: &LinearProgram) {
        let cost = |j: usize| if j < self.structural { lp.objective[j] } else { 0.0 };
        let mut d: Vec<f64> = (0..self.cols).map(cost).collect();
        for i in 0..self.rows {
            let cb = cost(self.basis[i]);
            if cb != 0.0 {
                self.body.row_into(i, &mut self.row_buf);
                axpy(&mut d, &self.row_buf, cb);
            }
        }
        for &j in &self.basis {
            d[j] = 0.0;
        }
        self.d = d;
    }

    fn primal_simplex(&mut self, tol_opt: f64, max_iter: usize) -> LpStatus {
        let mut streak = 0;
        loop {
            let bland = streak > DEGENERATE_STREAK;
            let mut q = None;
            let mut most = -tol_opt;
            for j in 0..self.cols {
                if self.is_basic[j] || self.d[j] >= -tol_opt {
                    continue;
                }
                if bland {
                    q = Some(j);
                    break;
                }
                if self.d[j] < most {
                    most = self.d[j];
                    q = Some(j);
                }
            }
            let Some(q) = q else {
                return LpStatus::Optimal;
            };
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }

            self.body.col_into(q, &mut self.col_buf);
            let mut p = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.col_buf[i];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                let better = match p {
                    None => true,
                    Some(pp) if tie => self.basis[i] < self.basis[pp],
                    Some(_) => ratio < best_ratio,
                };
                if better {
                    p = Some(i);
                    best_ratio = ratio;
                }
            }
            let Some(p) = p else {
                return LpStatus::Unbounded;
            };
            if best_ratio <= 1e-14 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.body.row_into(p, &mut self.row_buf);
            self.pivot(p, q);
        }
    }

    fn finish(&self, lp: &LinearProgram, status: LpStatus, tol_feas: f64) -> LpSolution {
        let n = self.structural;
        let mut x = vec![0.0; n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = self.rhs[i];
            }
        }
        if status == LpStatus::Optimal {
            if let Some(refined) = self.refine(lp) {
                if lp.max_violation(&refined) <= lp.max_violation(&x).max(tol_feas) {
                    x = refined;
                }
            }
            for v in &mut x {
                if *v < 0.0 && *v >= -tol_feas {
                    *v = 0.0;
                }
            }
        }
        let status = if status == LpStatus::Optimal && lp.max_violation(&x) > tol_feas {
            log::debug!("simplex ended with violation {:e}", lp.max_violation(&x));
            LpStatus::IterationLimit
        } else {
            status
        };
        LpSolution { objective_value: lp.value(&x), x, status, iterations: self.iterations }
    }

    /// Re-solves `B x_B = b` from the original data to shed pivoting round-off.
    fn refine(&self, lp: &LinearProgram) -> Option<Vec<f64>> {
        let (n, r) = (self.structural, self.rows);
        let bm = DMatrix::from_fn(r, r, |i, k| {
            let j = self.basis[k];
            if j < n {
                lp.entry(i, j)
            } else if j - n == i {
                1.0
            } else {
                0.0
            }
        });
        let sol = bm.lu().solve(&DVector::from_column_slice(&lp.b))?;
        let mut x = vec![0.0; n];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < n {
                x[j] = sol[k];
            }
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], a: &[&[f64]], b: &[f64]) -> LinearProgram {
        LinearProgram::new(c.to_vec(), a.concat(), b.to_vec()).unwrap()
    }

    #[test]
    fn lower_bound_through_negated_row() {
        let sol = solve_lp(&lp(&[1.0], &[&[-1.0]], &[-2.0]), &LpOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!((sol.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_region_is_infeasible() {
        let sol = solve_lp(&lp(&[1.0], &[&[1.0]], &[-1.0]), &LpOptions::default());
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_reported() {
        // min -x1 with only x1 - x2 <= 1
        let sol = solve_lp(&lp(&[-1.0, 0.0], &[&[1.0, -1.0]], &[1.0]), &LpOptions::default());
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let sol = solve_lp(
            &lp(&[-3.0, -5.0], &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]], &[4.0, 12.0, 18.0]),
            &LpOptions::default(),
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-10 && (sol.x[1] - 6.0).abs() < 1e-10);
        assert!((sol.objective_value + 36.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_start_needs_both_passes() {
        // min -x + y, x + y >= 2, x <= 3, y <= 3 -> x = 3, y = 0
        let sol = solve_lp(
            &lp(&[-1.0, 1.0], &[&[-1.0, -1.0], &[1.0, 0.0], &[0.0, 1.0]], &[-2.0, 3.0, 3.0]),
            &LpOptions::default(),
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 3.0).abs() < 1e-10);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let problem = lp(&[1.0, 1.0], &[&[-1.0, -2.0], &[-2.0, -1.0]], &[-3.0, -3.0]);
        let opts = LpOptions { max_iter: Some(0), ..Default::default() };
        assert_eq!(solve_lp(&problem, &opts).status, LpStatus::IterationLimit);
        assert_eq!(solve_lp(&problem, &LpOptions::default()).status, LpStatus::Optimal);
    }

    #[test]
    fn rejects_malformed() {
        assert!(LinearProgram::new(vec![1.0], vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![f64::NAN], vec![1.0], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn factored_matches_dense() {
        // rows of [[1, 0], [0, 1], [1, 1], [-1, -1]] times a 2 x 4 right factor
        let left = vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0, -1.0];
        let right = vec![1.0, 0.5, -0.3, 2.0, -1.0, 0.7, 1.2, 0.1];
        let b = vec![2.0, 1.5, 1.0, -0.5];
        let f = LinearProgram::factored(vec![1.0, 1.0, 1.0, 1.0], left, right, 2, b).unwrap();
        assert!(f.is_factored());
        let d = f.to_dense();
        for (u, v) in d.a_row(2).iter().zip([0.0, 1.2, 0.9, 2.1]) {
            assert!((u - v).abs() < 1e-15);
        }
        let x = [0.3, 0.1, 0.0, 0.2];
        for (u, v) in f.apply(&x).iter().zip(d.apply(&x)) {
            assert!((u - v).abs() < 1e-15);
        }
        let (sf, sd) = (solve_lp(&f, &LpOptions::default()), solve_lp(&d, &LpOptions::default()));
        assert_eq!(sf.status, LpStatus::Optimal);
        assert_eq!(sf.status, sd.status);
        assert!((sf.objective_value - sd.objective_value).abs() < 1e-12);
        assert!(LinearProgram::factored(vec![1.0], vec![1.0], vec![1.0, 2.0], 1, vec![1.0]).is_err());
    }

    #[test]
    fn deterministic() {
        let problem = lp(
            &[1.0, 1.0, 1.0],
            &[&[-1.0, -1.0, 0.0], &[0.0, -1.0, -1.0], &[-1.0, 0.0, -1.0]],
            &[-1.0, -1.0, -1.0],
        );
        let a = solve_lp(&problem, &LpOptions::default());
        let b = solve_lp(&problem, &LpOptions::default());
        assert_eq!(a, b);
        assert!((a.objective_value - 1.5).abs() < 1e-10);
    }
}
