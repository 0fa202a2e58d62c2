//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problem sizes here are small (a handful of equality rows, up to a few
//! tens of thousands of columns), so a dense tableau with Bland's rule is
//! the right trade: deterministic, cycle-free, and simple to certify.
//! Every l1-norm objective in the crate reaches this solver through the
//! standard split `w = w+ - w-` with nonnegative parts.

use crate::error::{Error, Result};
use crate::linalg::{l1_norm, linf_norm, sub, DenseMatrix};

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;
pub const DEFAULT_OPT_TOL: f64 = 1e-9;

/// Standard-form linear program: minimize `c x` subject to `A x = b`,
/// `lower <= x <= upper` (upper optional, lower defaults to zero).
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: DenseMatrix,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LpProblem {
    /// LP with default bounds `x >= 0`.
    pub fn standard(objective: Vec<f64>, constraints: DenseMatrix, rhs: Vec<f64>) -> Self {
        let n = constraints.cols();
        LpProblem {
            objective,
            constraints,
            rhs,
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.constraints.rows(), self.constraints.cols());
        if self.objective.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "objective length {} vs {} variables",
                self.objective.len(),
                n
            )));
        }
        if self.rhs.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} vs {} rows",
                self.rhs.len(),
                m
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch("bounds length".into()));
        }
        for j in 0..n {
            if let Some(u) = self.upper[j] {
                if self.lower[j] > u {
                    return Err(Error::InvalidParameter(format!(
                        "bounds for variable {j}: lower {} > upper {u}",
                        self.lower[j]
                    )));
                }
            }
        }
        let finite = self
            .objective
            .iter()
            .chain(&self.rhs)
            .chain(&self.lower)
            .all(|v| v.is_finite())
            && self.constraints.is_finite();
        if !finite {
            return Err(Error::NonFinite("lp problem data".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Present exactly when `status == Optimal`.
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    cols: usize,    // structural columns (no rhs)
    a: Vec<f64>,    // rows x (cols + 1), last column is rhs
    cost: Vec<f64>, // cols + 1, last entry is -objective
    basis: Vec<usize>,
    iterations: usize,
    cap: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * (self.cols + 1) + j] = v;
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let piv = self.at(r, c);
        for j in 0..w {
            self.a[r * w + j] /= piv;
        }
        self.set(r, c, 1.0);
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.a[i * w + j] -= f * self.a[r * w + j];
            }
            self.set(i, c, 0.0);
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..w {
                self.cost[j] -= f * self.a[r * w + j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Runs pivots until optimal or unbounded. `allowed` restricts the
    /// entering columns. Entering normally follows the most negative
    /// reduced cost; after a run of degenerate pivots it falls back to
    /// Bland's smallest-index rule, whose termination guarantee breaks any
    /// cycle, and returns to the fast rule once the objective moves.
    fn run(
        &mut self,
        allowed: &dyn Fn(usize) -> bool,
        opt_tol: f64,
        pivot_tol: f64,
    ) -> Result<bool> {
        const STALL_LIMIT: usize = 30;
        let mut stall = 0usize;
        let mut last_obj = self.cost[self.cols];
        // Columns that turned out numerically unusable this phase.
        let mut banned = vec![false; self.cols];
        loop {
            if self.iterations > self.cap {
                return Err(Error::IterationLimit { cap: self.cap });
            }
            let mut entering = None;
            if stall < STALL_LIMIT {
                let mut best = -opt_tol;
                for j in 0..self.cols {
                    if allowed(j) && !banned[j] && self.cost[j] < best {
                        best = self.cost[j];
                        entering = Some(j);
                    }
                }
            } else {
                for j in 0..self.cols {
                    if allowed(j) && !banned[j] && self.cost[j] < -opt_tol {
                        entering = Some(j);
                        break;
                    }
                }
            }
            let c = match entering {
                Some(c) => c,
                None => return Ok(true), // optimal
            };
            // Ratio test; ties broken by the smallest basic variable index
            // (the other half of Bland's rule).
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aic = self.at(i, c);
                if aic > pivot_tol {
                    let ratio = self.rhs(i) / aic;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((best_i, best_ratio)) => {
                            if ratio < best_ratio - 1e-12
                                || ((ratio - best_ratio).abs() <= 1e-12
                                    && self.basis[i] < self.basis[best_i])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => {
                    // No exit row. Certify an unbounded ray only when its
                    // descent rate is clearly negative; a noise-level
                    // reduced cost after many pivots is drift, so the
                    // column is dropped from consideration instead.
                    if self.cost[c] >= -1e3 * opt_tol {
                        banned[c] = true;
                        continue;
                    }
                    return Ok(false); // unbounded ray in column c
                }
            }
            let obj = self.cost[self.cols];
            if (obj - last_obj).abs() > 1e-12 * (1.0 + obj.abs()) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
        }
    }
}

/// Solves the LP with a two-phase dense primal simplex.
///
/// Infeasibility is certified by a phase-1 objective above `feas_tol`;
/// unboundedness by a ray found in phase 2. Hitting the iteration cap
/// `50 * (rows + cols)` is a distinct error, never a silently truncated
/// answer.
pub fn simplex_solve(p: &LpProblem, feas_tol: f64, opt_tol: f64) -> Result<LpSolution> {
    if feas_tol <= 0.0 || opt_tol <= 0.0 {
        return Err(Error::InvalidParameter(
            "tolerances must be positive".into(),
        ));
    }
    p.validate()?;
    let m0 = p.constraints.rows();
    let n0 = p.constraints.cols();

    // Standardize: shift out lower bounds, add a slack row per finite
    // upper bound. Variables of the standardized problem: n0 originals
    // (shifted) then one slack per bounded variable.
    let uppers: Vec<(usize, f64)> = p
        .upper
        .iter()
        .enumerate()
        .filter_map(|(j, u)| u.map(|ub| (j, ub - p.lower[j])))
        .collect();
    let m = m0 + uppers.len();
    let n = n0 + uppers.len();

    let mut b = vec![0.0; m];
    for i in 0..m0 {
        let mut shift = 0.0;
        for j in 0..n0 {
            shift += p.constraints.get(i, j) * p.lower[j];
        }
        b[i] = p.rhs[i] - shift;
    }
    for (k, &(_, range)) in uppers.iter().enumerate() {
        b[m0 + k] = range;
    }

    let cols = n + m; // structural + artificial
    let mut t = Tableau {
        rows: m,
        cols,
        a: vec![0.0; m * (cols + 1)],
        cost: vec![0.0; cols + 1],
        basis: vec![0; m],
        iterations: 0,
        cap: 50 * (m + cols),
    };
    for i in 0..m0 {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n0 {
            t.set(i, j, sign * p.constraints.get(i, j));
        }
        t.set(i, cols, sign * b[i]);
    }
    for (k, &(j, _)) in uppers.iter().enumerate() {
        let i = m0 + k;
        // b here is a nonnegative range, no sign flip needed.
        t.set(i, j, 1.0);
        t.set(i, n0 + k, 1.0);
        t.set(i, cols, b[i]);
    }
    for i in 0..m {
        t.set(i, n + i, 1.0);
        t.basis[i] = n + i;
    }

    // Phase 1: minimize the sum of artificials. Reduced costs start at
    // c - 1^T A for the artificial basis.
    for j in 0..=cols {
        let mut s = 0.0;
        for i in 0..m {
            s += t.at(i, j);
        }
        t.cost[j] = if j < n {
            -s
        } else if j < cols {
            0.0
        } else {
            -s
        };
    }
    let optimal = t.run(&|_| true, opt_tol, 1e-11)?;
    if !optimal {
        // Phase 1 is bounded below by zero; a ray here is lost precision.
        return Err(Error::NonConvergence {
            iterations: t.iterations,
            residual: -t.cost[cols],
        });
    }
    let phase1_obj = -t.cost[cols];
    let iterations_p1 = t.iterations;
    if phase1_obj > feas_tol {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: None,
            objective: None,
            iterations: iterations_p1,
        });
    }

    // Drive leftover artificials out of the basis where a structural pivot
    // exists; a row with none is redundant and gets cleaned to zero.
    for r in 0..m {
        if t.basis[r] < n {
            continue;
        }
        let piv = (0..n).find(|&j| t.at(r, j).abs() > 1e-9);
        match piv {
            Some(j) => t.pivot(r, j),
            None => {
                for j in 0..cols {
                    t.set(r, j, 0.0);
                }
                t.set(r, cols, 0.0);
            }
        }
    }

    // Phase 2 cost row: the original objective over shifted variables,
    // canonicalized against the current basis.
    let mut cost = vec![0.0; cols + 1];
    for j in 0..n0 {
        cost[j] = p.objective[j];
    }
    for (r, &bv) in t.basis.iter().enumerate() {
        let cb = if bv < n0 { p.objective[bv] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=cols {
                cost[j] -= cb * t.at(r, j);
            }
            cost[bv] = 0.0;
        }
    }
    t.cost = cost;

    let optimal = t.run(&|j| j < n, opt_tol, 1e-11)?;
    if !optimal {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: None,
            objective: None,
            iterations: t.iterations,
        });
    }

    let mut x = p.lower.clone();
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n0 {
            x[bv] += t.rhs(r);
        }
    }
    let objective = x.iter().zip(&p.objective).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective: Some(objective),
        iterations: t.iterations,
    })
}

/// Outcome of [`lp_feasible`].
#[derive(Debug, Clone)]
pub struct L1Feasibility {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
}

/// Minimum-l1 solution of `A w = y` over coordinates not marked in `skip`,
/// through the split `w = w+ - w-`. Returns the status, the recombined
/// witness, and the pivot count.
pub(crate) fn solve_min_l1(
    a: &DenseMatrix,
    y: &[f64],
    skip: Option<&[bool]>,
    feas_tol: f64,
    opt_tol: f64,
) -> Result<(LpStatus, Option<Vec<f64>>, usize)> {
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but y has length {}",
            a.rows(),
            y.len()
        )));
    }
    let n = a.cols();
    let active: Vec<usize> = match skip {
        Some(mask) => {
            if mask.len() != n {
                return Err(Error::DimensionMismatch("skip mask length".into()));
            }
            (0..n).filter(|&j| !mask[j]).collect()
        }
        None => (0..n).collect(),
    };
    let k = active.len();
    let m = a.rows();
    let mut split = DenseMatrix::zeros(m, 2 * k);
    for i in 0..m {
        for (jj, &j) in active.iter().enumerate() {
            let v = a.get(i, j);
            split.set(i, jj, v);
            split.set(i, k + jj, -v);
        }
    }
    let problem = LpProblem::standard(vec![1.0; 2 * k], split, y.to_vec());
    let sol = simplex_solve(&problem, feas_tol, opt_tol)?;
    match sol.status {
        LpStatus::Optimal => {
            let parts = sol.x.expect("optimal solution has a point");
            let mut w = vec![0.0; n];
            for (jj, &j) in active.iter().enumerate() {
                w[j] = parts[jj] - parts[k + jj];
            }
            Ok((LpStatus::Optimal, Some(w), sol.iterations))
        }
        s => Ok((s, None, sol.iterations)),
    }
}

/// Decides whether some `w` satisfies `A w = b` with `||w||_1` within the
/// budget, by minimizing the l1 norm and comparing against
/// `l1_budget + feas_tol`.
pub fn lp_feasible(a: &DenseMatrix, b: &[f64], l1_budget: f64) -> Result<L1Feasibility> {
    if l1_budget < 0.0 {
        return Err(Error::InvalidParameter(
            "l1_budget must be nonnegative".into(),
        ));
    }
    let (status, w, _) = solve_min_l1(a, b, None, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    match status {
        LpStatus::Optimal => {
            let w = w.expect("witness");
            if l1_norm(&w) <= l1_budget + DEFAULT_FEAS_TOL {
                Ok(L1Feasibility {
                    feasible: true,
                    witness: Some(w),
                })
            } else {
                Ok(L1Feasibility {
                    feasible: false,
                    witness: None,
                })
            }
        }
        _ => Ok(L1Feasibility {
            feasible: false,
            witness: None,
        }),
    }
}

/// Residual check used by callers and tests: `||A x - b||_inf`.
pub fn equality_residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    linf_norm(&sub(&a.mul_vec(x), b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::l2_norm;
    use crate::rng::derive_stream;
    use proptest::prelude::*;

    #[test]
    fn minimal_example_picks_free_vertex() {
        // min x1 s.t. x1 + x2 = 1, x >= 0.
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let p = LpProblem::standard(vec![1.0, 0.0], a, vec![1.0]);
        let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let x = sol.x.unwrap();
        assert!(sol.objective.unwrap().abs() < 1e-9);
        assert!((x[0]).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_with_nonnegative_var_is_infeasible() {
        let a = DenseMatrix::new(1, 1, vec![1.0]).unwrap();
        let p = LpProblem::standard(vec![0.0], a, vec![-1.0]);
        let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 s.t. x1 - x2 = 0: x1 = x2 -> infinity.
        let a = DenseMatrix::new(1, 2, vec![1.0, -1.0]).unwrap();
        let p = LpProblem::standard(vec![-1.0, 0.0], a, vec![0.0]);
        let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn respects_upper_bounds() {
        // min -x1 - x2 s.t. x1 + x2 + x3 = 10, x1 <= 2, x2 <= 3.
        let a = DenseMatrix::new(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let mut p = LpProblem::standard(vec![-1.0, -1.0, 0.0], a, vec![10.0]);
        p.upper[0] = Some(2.0);
        p.upper[1] = Some(3.0);
        let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective.unwrap() + 5.0).abs() < 1e-9);
    }

    #[test]
    fn respects_lower_bound_shift() {
        // min x1 s.t. x1 + x2 = 1, x1 >= 0.25.
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let mut p = LpProblem::standard(vec![1.0, 0.0], a, vec![1.0]);
        p.lower[0] = 0.25;
        let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective.unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn lp_feasible_identity_budgets() {
        let a = DenseMatrix::identity(3);
        let hit = lp_feasible(&a, &[1.0, 0.0, 0.0], 1.0).unwrap();
        assert!(hit.feasible);
        let w = hit.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-9);

        let miss = lp_feasible(&a, &[2.0, 0.0, 0.0], 1.0).unwrap();
        assert!(!miss.feasible);
    }

    // Independent check for tiny systems: solve A_B x = b by Gaussian
    // elimination without any simplex machinery.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut rhs = b.to_vec();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).unwrap())?;
            if m[piv][k].abs() < 1e-11 {
                return None;
            }
            m.swap(k, piv);
            rhs.swap(k, piv);
            for i in (k + 1)..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                rhs[i] -= f * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut acc = rhs[k];
            for j in (k + 1)..n {
                acc -= m[k][j] * x[j];
            }
            x[k] = acc / m[k][k];
        }
        Some(x)
    }

    /// Enumerates all basic feasible solutions of `min cx : Ax = b, x >= 0`
    /// and returns the best objective, or None if no BFS is feasible.
    fn bfs_oracle(a: &DenseMatrix, b: &[f64], c: &[f64]) -> Option<f64> {
        let m = a.rows();
        let n = a.cols();
        let mut best: Option<f64> = None;
        crate::linalg::for_each_subset(n, m, |cols| {
            let sub: Vec<Vec<f64>> = (0..m)
                .map(|i| cols.iter().map(|&j| a.get(i, j)).collect())
                .collect();
            if let Some(xb) = dense_solve(&sub, b) {
                if xb.iter().all(|&v| v >= -1e-9) {
                    let obj: f64 = xb.iter().zip(cols).map(|(v, &j)| v * c[j]).sum();
                    best = Some(match best {
                        None => obj,
                        Some(cur) => cur.min(obj),
                    });
                }
            }
        });
        best
    }

    #[test]
    fn random_lp_matches_bfs_enumeration() {
        for seed in 0..40u64 {
            let mut s = derive_stream(seed, 77);
            let m = 3;
            let n = 6;
            let data: Vec<f64> = (0..m * n).map(|_| s.next_gaussian()).collect();
            let a = DenseMatrix::new(m, n, data).unwrap();
            // Feasible by construction.
            let x_feas: Vec<f64> = (0..n).map(|_| s.next_f64()).collect();
            let b = a.mul_vec(&x_feas);
            let c: Vec<f64> = (0..n).map(|_| 0.1 + s.next_f64()).collect();
            let p = LpProblem::standard(c.clone(), a.clone(), b.clone());
            let sol = simplex_solve(&p, 1e-9, 1e-9).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
            let oracle = bfs_oracle(&a, &b, &c).expect("feasible by construction");
            assert!(
                (sol.objective.unwrap() - oracle).abs() < 1e-8,
                "seed {seed}: simplex {} vs oracle {oracle}",
                sol.objective.unwrap()
            );
            // Solution must satisfy the constraints tightly.
            let x = sol.x.unwrap();
            assert!(equality_residual(&a, &x, &b) <= 1e-9);
            assert!(x.iter().all(|&v| v >= -1e-9));
        }
    }

    #[test]
    fn optimal_solutions_are_basic() {
        for seed in 100..120u64 {
            let mut s = derive_stream(seed, 78);
            let m = 3;
            let n = 10;
            let data: Vec<f64> = (0..m * n).map(|_| s.next_gaussian()).collect();
            let a = DenseMatrix::new(m, n, data).unwrap();
            let x_feas: Vec<f64> = (0..n).map(|_| s.next_f64()).collect();
            let b = a.mul_vec(&x_feas);
            let c: Vec<f64> = (0..n).map(|_| 0.1 + s.next_f64()).collect();
            let sol = simplex_solve(&LpProblem::standard(c, a, b), 1e-9, 1e-9).unwrap();
            let x = sol.x.unwrap();
            let support = x.iter().filter(|&&v| v > 1e-9).count();
            assert!(support <= m, "vertex support {support} > {m}");
        }
    }

    // Oracle for tiny min-l1 interpolation problems: the optimum sits on
    // a basic solution, so enumerating all column subsets of size at most
    // rank and solving each exactly yields the true minimum.
    #[test]
    fn min_l1_matches_support_enumeration_oracle() {
        for seed in 200..230u64 {
            let mut s = derive_stream(seed, 81);
            let a_data: Vec<f64> = (0..8).map(|_| s.next_gaussian()).collect();
            let a = DenseMatrix::new(2, 4, a_data).unwrap();
            let w0: Vec<f64> = (0..4).map(|_| s.next_gaussian()).collect();
            let b = a.mul_vec(&w0);

            let mut oracle = f64::INFINITY;
            for j in 0..4 {
                // Single-column candidates.
                let col = a.column(j);
                let denom = col[0] * col[0] + col[1] * col[1];
                if denom > 1e-12 {
                    let coef = (col[0] * b[0] + col[1] * b[1]) / denom;
                    let resid =
                        ((b[0] - coef * col[0]).powi(2) + (b[1] - coef * col[1]).powi(2)).sqrt();
                    if resid < 1e-9 {
                        oracle = oracle.min(coef.abs());
                    }
                }
                for k in (j + 1)..4 {
                    let (cj, ck) = (a.column(j), a.column(k));
                    let det = cj[0] * ck[1] - cj[1] * ck[0];
                    if det.abs() < 1e-11 {
                        continue;
                    }
                    let x1 = (b[0] * ck[1] - b[1] * ck[0]) / det;
                    let x2 = (cj[0] * b[1] - cj[1] * b[0]) / det;
                    oracle = oracle.min(x1.abs() + x2.abs());
                }
            }

            let (status, w, _) = solve_min_l1(&a, &b, None, 1e-9, 1e-9).unwrap();
            assert_eq!(status, LpStatus::Optimal);
            let lp_norm = l1_norm(&w.unwrap());
            assert!(
                (lp_norm - oracle).abs() < 1e-8,
                "seed {seed}: lp {lp_norm} vs oracle {oracle}"
            );
            // The feasibility wrapper must agree on both sides of the cut.
            assert!(lp_feasible(&a, &b, oracle + 1e-6).unwrap().feasible);
            if oracle > 1e-5 {
                assert!(!lp_feasible(&a, &b, oracle - 1e-5).unwrap().feasible);
            }
        }
    }

    #[test]
    fn membership_with_duplicate_column() {
        // Column 2 equals column 1, so e1's image is reachable with unit
        // budget off the first coordinate.
        let a = DenseMatrix::new(2, 3, vec![1.0, 1.0, 0.0, 2.0, 2.0, 1.0]).unwrap();
        let target = a.column(0);
        let reduced = a.select_columns(&[1, 2]);
        let fit = lp_feasible(&reduced, &target, 1.0).unwrap();
        assert!(fit.feasible);
        let w = fit.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-9 && w[1].abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Permuting columns permutes the solution but not the optimum.
        #[test]
        fn column_permutation_invariance(seed in 0u64..200) {
            let mut s = derive_stream(seed, 79);
            let m = 2;
            let n = 5;
            let data: Vec<f64> = (0..m * n).map(|_| s.next_gaussian()).collect();
            let a = DenseMatrix::new(m, n, data).unwrap();
            let x_feas: Vec<f64> = (0..n).map(|_| s.next_f64()).collect();
            let b = a.mul_vec(&x_feas);
            let c: Vec<f64> = (0..n).map(|_| 0.1 + s.next_f64()).collect();

            let sol = simplex_solve(&LpProblem::standard(c.clone(), a.clone(), b.clone()), 1e-9, 1e-9).unwrap();
            prop_assume!(sol.status == LpStatus::Optimal);

            let perm: Vec<usize> = (0..n).rev().collect();
            let ap = a.select_columns(&perm);
            let cp: Vec<f64> = perm.iter().map(|&j| c[j]).collect();
            let solp = simplex_solve(&LpProblem::standard(cp, ap, b), 1e-9, 1e-9).unwrap();
            prop_assert_eq!(solp.status, LpStatus::Optimal);
            prop_assert!((sol.objective.unwrap() - solp.objective.unwrap()).abs() < 1e-9);
        }

        // The minimum l1 interpolant never beats the true generator by
        // more than the l1 slack it is allowed.
        #[test]
        fn min_l1_is_lower_bound(seed in 0u64..200) {
            let mut s = derive_stream(seed, 80);
            let m = 3;
            let n = 7;
            let data: Vec<f64> = (0..m * n).map(|_| s.next_gaussian()).collect();
            let a = DenseMatrix::new(m, n, data).unwrap();
            let x0: Vec<f64> = (0..n).map(|_| s.next_gaussian()).collect();
            let y = a.mul_vec(&x0);
            let (status, w, _) = solve_min_l1(&a, &y, None, 1e-9, 1e-9).unwrap();
            prop_assert_eq!(status, LpStatus::Optimal);
            let w = w.unwrap();
            prop_assert!(l1_norm(&w) <= l1_norm(&x0) + 1e-8);
            prop_assert!(l2_norm(&sub(&a.mul_vec(&w), &y)) <= 1e-7);
        }
    }
}
