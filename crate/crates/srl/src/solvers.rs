//! Recovery procedures: basis pursuit, the competitor test that certifies
//! reconstruction failure, exhaustive l0 minimization, and the lasso.

use crate::error::{Error, Result};
use crate::linalg::{
    binomial, dot, for_each_subset, l1_norm, l2_norm, least_squares_residual, linf_norm,
    singular_extremes, sub, DenseMatrix,
};
use crate::lp::{solve_min_l1, LpStatus, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};

/// Infinity-norm error below which a reconstruction counts as exact.
/// The simplex reaches 1e-9 feasibility on well-scaled desk instances,
/// so 1e-6 leaves a wide margin.
pub const DEFAULT_REC_TOL: f64 = 1e-6;

/// Outcome of a recovery procedure.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub xhat: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Set when a reference signal was supplied.
    pub recovered: Option<bool>,
    pub l2_error: Option<f64>,
    pub linf_error: Option<f64>,
}

impl RecoveryResult {
    fn plain(xhat: Vec<f64>, objective: f64, iterations: usize) -> Self {
        RecoveryResult {
            xhat,
            objective,
            status: LpStatus::Optimal,
            iterations,
            recovered: None,
            l2_error: None,
            linf_error: None,
        }
    }

    /// Fills the error fields against a reference signal; `recovered`
    /// means the infinity error is within `rec_tol`.
    pub fn with_reference(mut self, x0: &[f64], rec_tol: f64) -> Self {
        let diff = sub(&self.xhat, x0);
        let linf = linf_norm(&diff);
        self.l2_error = Some(l2_norm(&diff));
        self.linf_error = Some(linf);
        self.recovered = Some(linf <= rec_tol);
        self
    }
}

/// Basis pursuit: minimize `||t||_1` subject to `Gamma t = y`, solved as a
/// linear program over the split `t = t+ - t-`.
///
/// Errors with [`Error::NoSolution`] when `y` is not in the range of
/// `Gamma` within the solver's feasibility tolerance.
pub fn basis_pursuit(
    gamma: &DenseMatrix,
    y: &[f64],
    x0_ref: Option<&[f64]>,
) -> Result<RecoveryResult> {
    let (status, w, iterations) = solve_min_l1(gamma, y, None, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    match status {
        LpStatus::Optimal => {
            let xhat = w.expect("optimal LP carries a point");
            let objective = l1_norm(&xhat);
            let mut out = RecoveryResult::plain(xhat, objective, iterations);
            if let Some(x0) = x0_ref {
                out = out.with_reference(x0, DEFAULT_REC_TOL);
            }
            Ok(out)
        }
        LpStatus::Infeasible => Err(Error::NoSolution(
            "basis pursuit: measurements are outside the range of the matrix".into(),
        )),
        LpStatus::Unbounded => Err(Error::NoSolution(
            "basis pursuit LP reported unbounded, which cannot happen for a norm objective".into(),
        )),
    }
}

/// Cheapest competitor off the support: minimum `||w||_1` over `w` with
/// `Gamma w = Gamma v` and `w` vanishing on `j_set` (`v` is normalized to
/// unit l1 norm first). Returns infinity when no competitor exists.
///
/// A value at most `1 + feas_tol` certifies that `v` is not the unique
/// minimizer of basis pursuit on its own measurements, so exact
/// reconstruction of order `|j_set|` fails.
pub fn competitor_norm(gamma: &DenseMatrix, v: &[f64], j_set: &[usize]) -> Result<f64> {
    if v.len() != gamma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "v has length {} but the matrix has {} columns",
            v.len(),
            gamma.cols()
        )));
    }
    let norm = l1_norm(v);
    if norm == 0.0 {
        return Err(Error::InvalidParameter("v must be nonzero".into()));
    }
    let in_set = {
        let mut mask = vec![false; v.len()];
        for &j in j_set {
            if j >= v.len() {
                return Err(Error::InvalidParameter(format!("index {j} out of range")));
            }
            mask[j] = true;
        }
        mask
    };
    for (j, &vj) in v.iter().enumerate() {
        if !in_set[j] && vj.abs() > 1e-12 * norm {
            return Err(Error::InvalidParameter(format!(
                "v has mass at coordinate {j} outside the candidate support"
            )));
        }
    }
    let scaled: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let rhs = gamma.mul_vec(&scaled);
    let (status, w, _) = solve_min_l1(
        gamma,
        &rhs,
        Some(&in_set),
        DEFAULT_FEAS_TOL,
        DEFAULT_OPT_TOL,
    )?;
    match status {
        LpStatus::Optimal => Ok(l1_norm(&w.expect("optimal LP carries a point"))),
        _ => Ok(f64::INFINITY),
    }
}

/// All sparsest solutions of `Gamma t = y`, found by exhausting supports
/// in order of cardinality.
#[derive(Debug, Clone)]
pub struct L0Result {
    /// Every solution at the minimal feasible cardinality.
    pub solutions: Vec<Vec<f64>>,
    pub sparsity: usize,
    pub unique: bool,
}

/// Exhaustive l0 minimization: enumerates supports by increasing size; a
/// support counts as a solution when the least-squares fit on it matches
/// `y` within `feas_tol * (1 + ||y||_2)`. All minimal-cardinality
/// solutions are returned, since uniqueness is part of the question.
pub fn l0_min(gamma: &DenseMatrix, y: &[f64], max_support: usize) -> Result<L0Result> {
    if gamma.rows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but y has length {}",
            gamma.rows(),
            y.len()
        )));
    }
    let cap = gamma.rows().min(12);
    if max_support > cap {
        return Err(Error::GuardExceeded(format!(
            "l0_min: max_support {max_support} exceeds min(rows, 12) = {cap}"
        )));
    }
    let n = gamma.cols();
    let thresh = DEFAULT_FEAS_TOL * (1.0 + l2_norm(y));
    if l2_norm(y) <= thresh {
        return Ok(L0Result {
            solutions: vec![vec![0.0; n]],
            sparsity: 0,
            unique: true,
        });
    }
    for k in 1..=max_support {
        if binomial(n, k) > 10_000_000 {
            return Err(Error::GuardExceeded(format!(
                "l0_min: C({n},{k}) supports exceed the enumeration guard"
            )));
        }
        let mut found: Vec<Vec<f64>> = Vec::new();
        let mut ls_error: Option<Error> = None;
        for_each_subset(n, k, |support| {
            if ls_error.is_some() {
                return;
            }
            let sub_matrix = gamma.select_columns(support);
            match least_squares_residual(&sub_matrix, y) {
                Ok((coef, resid)) => {
                    if resid <= thresh {
                        let mut full = vec![0.0; n];
                        for (c, &j) in coef.iter().zip(support) {
                            full[j] = *c;
                        }
                        found.push(full);
                    }
                }
                Err(e) => ls_error = Some(e),
            }
        });
        if let Some(e) = ls_error {
            return Err(e);
        }
        if !found.is_empty() {
            let unique = found.len() == 1;
            return Ok(L0Result {
                solutions: found,
                sparsity: k,
                unique,
            });
        }
    }
    Err(Error::NoSolution(format!(
        "no support of size at most {max_support} fits the measurements"
    )))
}

#[inline]
fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn lasso_objective(x_rows: &DenseMatrix, z: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let resid = sub(z, &x_rows.mul_vec(x));
    let n = x_rows.rows() as f64;
    dot(&resid, &resid) / n + lambda * l1_norm(x)
}

/// Worst violation of the l1-subgradient optimality conditions at `x`.
fn lasso_kkt_residual(grad: &[f64], x: &[f64], lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for (g, &xi) in grad.iter().zip(x) {
        let v = if xi > 1e-12 {
            (g + lambda).abs()
        } else if xi < -1e-12 {
            (g - lambda).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Lasso over the unnormalized measurement rows: minimizes
/// `(1/N) sum (z_i - <X_i, x>)^2 + lambda ||x||_1` by proximal gradient
/// (soft thresholding) with the fixed step `1/L`, `L = 2 sigma_max(X)^2 / N`,
/// until the subgradient optimality conditions hold within `kkt_tol`.
pub fn lasso(
    x_rows: &DenseMatrix,
    z: &[f64],
    lambda: f64,
    max_iter: usize,
    kkt_tol: f64,
) -> Result<RecoveryResult> {
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
    }
    if x_rows.rows() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but z has length {}",
            x_rows.rows(),
            z.len()
        )));
    }
    let rows = x_rows.rows() as f64;
    let n = x_rows.cols();
    let (_, sigma_max) = singular_extremes(x_rows)?;
    if sigma_max == 0.0 {
        let xhat = vec![0.0; n];
        let objective = lasso_objective(x_rows, z, lambda, &xhat);
        return Ok(RecoveryResult::plain(xhat, objective, 0));
    }
    let lipschitz = 2.0 * sigma_max * sigma_max / rows;
    let step = 1.0 / lipschitz;

    let mut x = vec![0.0; n];
    let mut prev_obj = lasso_objective(x_rows, z, lambda, &x);
    for iter in 0..max_iter {
        let fitted = x_rows.mul_vec(&x);
        let resid = sub(&fitted, z);
        let mut grad = x_rows.tr_mul_vec(&resid);
        grad.iter_mut().for_each(|g| *g *= 2.0 / rows);

        let kkt = lasso_kkt_residual(&grad, &x, lambda);
        if kkt <= kkt_tol {
            let objective = lasso_objective(x_rows, z, lambda, &x);
            return Ok(RecoveryResult::plain(x, objective, iter));
        }

        for j in 0..n {
            x[j] = soft_threshold(x[j] - step * grad[j], step * lambda);
        }
        let obj = lasso_objective(x_rows, z, lambda, &x);
        debug_assert!(
            obj <= prev_obj + 1e-10 * (1.0 + prev_obj.abs()),
            "proximal step increased the objective: {prev_obj} -> {obj}"
        );
        prev_obj = obj;
    }
    let fitted = x_rows.mul_vec(&x);
    let resid = sub(&fitted, z);
    let mut grad = x_rows.tr_mul_vec(&resid);
    grad.iter_mut().for_each(|g| *g *= 2.0 / rows);
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: lasso_kkt_residual(&grad, &x, lambda),
    })
}
