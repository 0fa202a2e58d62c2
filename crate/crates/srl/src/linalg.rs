//! Dense linear algebra: matrices, vector norms, singular extremes,
//! kernel bases and least squares.
//!
//! Everything here is double precision and dense. The matrices in scope
//! are at most a few hundred rows by a few tens of thousands of columns,
//! which dense storage handles comfortably.

use crate::error::{Error, Result};

/// Threshold below which an entry counts as zero for support decisions.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "storage size {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidParameter("no rows".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Matrix with the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec shape");
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `A^T x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_mul_vec shape");
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    /// Gram matrix `A^T A` (cols x cols).
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..self.rows {
            let row = self.row(i);
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..n {
                    let v = g.get(a, b) + ra * row[b];
                    g.set(a, b, v);
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g.set(a, b, g.get(b, a));
            }
        }
        g
    }

    /// Outer Gram matrix `A A^T` (rows x rows).
    pub fn outer_gram(&self) -> DenseMatrix {
        let m = self.rows;
        let mut g = DenseMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let mut acc = 0.0;
                let (ra, rb) = (self.row(a), self.row(b));
                for j in 0..self.cols {
                    acc += ra[j] * rb[j];
                }
                g.set(a, b, acc);
                g.set(b, a, acc);
            }
        }
        g
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Which vector norm to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L0,
    L1,
    L2,
    LInf,
}

/// Vector norm; `L0` counts entries with magnitude above [`DEFAULT_ZERO_TOL`].
pub fn norm(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::L0 => l0_norm(v, DEFAULT_ZERO_TOL),
        NormKind::L1 => l1_norm(v),
        NormKind::L2 => l2_norm(v),
        NormKind::LInf => linf_norm(v),
    }
}

pub fn l0_norm(v: &[f64], zero_tol: f64) -> f64 {
    v.iter().filter(|x| x.abs() > zero_tol).count() as f64
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn linf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a - b`.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
fn jacobi_eigen(g: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = g.rows();
    assert_eq!(n, g.cols(), "jacobi_eigen expects a square matrix");
    let mut a = g.clone();
    let mut v = DenseMatrix::identity(n);
    if n == 1 {
        return Ok((vec![a.get(0, 0)], v));
    }
    let frob: f64 = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) * a.get(i, j)).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        if (2.0 * off).sqrt() <= tol {
            let eigs = (0..n).map(|i| a.get(i, i)).collect();
            return Ok((eigs, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: 60,
        residual: f64::NAN,
    })
}

/// Smallest and largest singular values of `A`, taken over the full domain
/// sphere: `sigma_min = min ||Ax||_2` and `sigma_max = max ||Ax||_2` over
/// unit `x`. Computed from a Jacobi eigen-decomposition of the Gram matrix
/// on the smaller side. A matrix with more columns than rows has a kernel,
/// so its `sigma_min` is exactly zero.
pub fn singular_extremes(a: &DenseMatrix) -> Result<(f64, f64)> {
    if !a.is_finite() {
        return Err(Error::NonFinite("singular_extremes input".into()));
    }
    if a.cols() <= a.rows() {
        let (eigs, _) = jacobi_eigen(&a.gram())?;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for e in eigs {
            let s = e.max(0.0).sqrt();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        Ok((lo, hi))
    } else {
        let (eigs, _) = jacobi_eigen(&a.outer_gram())?;
        let hi = eigs.iter().fold(0.0f64, |m, &e| m.max(e.max(0.0).sqrt()));
        Ok((0.0, hi))
    }
}

/// Householder QR with column pivoting of `m`; returns (q, r, perm) with
/// `m[:, perm] = q r`, `q` square orthonormal.
fn qr_col_pivot(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix, Vec<usize>) {
    let rows = m.rows();
    let cols = m.cols();
    let mut r = m.clone();
    let mut q = DenseMatrix::identity(rows);
    let mut perm: Vec<usize> = (0..cols).collect();

    let steps = rows.min(cols);
    for k in 0..steps {
        // Pivot: bring the column with the largest remaining norm to k.
        let mut best = k;
        let mut best_norm = 0.0;
        for j in k..cols {
            let nj: f64 = (k..rows).map(|i| r.get(i, j) * r.get(i, j)).sum();
            if nj > best_norm {
                best_norm = nj;
                best = j;
            }
        }
        if best != k {
            for i in 0..rows {
                let t = r.get(i, k);
                r.set(i, k, r.get(i, best));
                r.set(i, best, t);
            }
            perm.swap(k, best);
        }
        let col_norm = best_norm.sqrt();
        if col_norm == 0.0 {
            continue;
        }
        // Householder vector for column k below the diagonal.
        let mut v: Vec<f64> = (k..rows).map(|i| r.get(i, k)).collect();
        let alpha = -v[0].signum() * col_norm;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to R (rows k..) and accumulate in Q.
        for j in k..cols {
            let mut proj = 0.0;
            for (t, vi) in v.iter().enumerate() {
                proj += vi * r.get(k + t, j);
            }
            proj *= 2.0 / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                let val = r.get(k + t, j) - proj * vi;
                r.set(k + t, j, val);
            }
        }
        for j in 0..rows {
            let mut proj = 0.0;
            for (t, vi) in v.iter().enumerate() {
                proj += vi * q.get(j, k + t);
            }
            proj *= 2.0 / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                let val = q.get(j, k + t) - proj * vi;
                q.set(j, k + t, val);
            }
        }
        // Force exact zeros below the diagonal of column k.
        r.set(k, k, alpha);
        for i in (k + 1)..rows {
            r.set(i, k, 0.0);
        }
    }
    (q, r, perm)
}

/// Orthonormal basis of `ker(A)`; empty when the numerical rank equals the
/// column count. `rank_tol` defaults to `1e-10 * sigma_max(A)`.
///
/// The basis comes from a full Householder QR of `A^T` with column
/// pivoting: the trailing columns of `Q` beyond the numerical rank span the
/// orthogonal complement of the row space.
pub fn nullspace_basis(a: &DenseMatrix, rank_tol: Option<f64>) -> Result<Vec<Vec<f64>>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("nullspace_basis input".into()));
    }
    let tol = match rank_tol {
        Some(t) => {
            if t <= 0.0 {
                return Err(Error::InvalidParameter("rank_tol must be positive".into()));
            }
            t
        }
        None => {
            let (_, smax) = singular_extremes(a)?;
            1e-10 * smax.max(f64::MIN_POSITIVE)
        }
    };
    let at = a.transpose(); // n x N
    let (q, r, _) = qr_col_pivot(&at);
    let n = a.cols();
    let steps = at.rows().min(at.cols());
    let mut rank = 0;
    for k in 0..steps {
        if r.get(k, k).abs() > tol {
            rank += 1;
        }
    }
    let mut basis = Vec::with_capacity(n - rank);
    for j in rank..n {
        basis.push(q.column(j));
    }
    Ok(basis)
}

/// Least-squares solution of `A x = y` by the normal equations with
/// pivoted Gaussian elimination; rank-deficient directions get zero
/// coefficients. Returns `(x, ||A x - y||_2)`.
pub fn least_squares_residual(a: &DenseMatrix, y: &[f64]) -> Result<(Vec<f64>, f64)> {
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but y has length {}",
            a.rows(),
            y.len()
        )));
    }
    if !a.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least_squares input".into()));
    }
    let n = a.cols();
    let mut g = a.gram();
    let mut rhs = a.tr_mul_vec(y);
    let scale = (0..n).fold(0.0f64, |m, i| m.max(g.get(i, i).abs()));
    let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);

    // Gaussian elimination with partial pivoting; tiny pivots mean a
    // numerically rank-deficient direction, whose variable is pinned to 0.
    let mut order: Vec<usize> = (0..n).collect();
    let mut pinned = vec![false; n];
    for k in 0..n {
        let mut best = k;
        let mut best_val = 0.0;
        for i in k..n {
            let v = g.get(order[i], k).abs();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        order.swap(k, best);
        let piv_row = order[k];
        let piv = g.get(piv_row, k);
        if piv.abs() <= tol {
            pinned[k] = true;
            continue;
        }
        for i in (k + 1)..n {
            let row = order[i];
            let factor = g.get(row, k) / piv;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                let v = g.get(row, j) - factor * g.get(piv_row, j);
                g.set(row, j, v);
            }
            rhs[row] -= factor * rhs[piv_row];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        if pinned[k] {
            x[k] = 0.0;
            continue;
        }
        let row = order[k];
        let mut acc = rhs[row];
        for j in (k + 1)..n {
            acc -= g.get(row, j) * x[j];
        }
        x[k] = acc / g.get(row, k);
    }
    let resid = sub(&a.mul_vec(&x), y);
    Ok((x, l2_norm(&resid)))
}

/// `C(n, k)` clamped to `u128`, saturating; used by combinatorial guards.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u128::MAX / 2 {
            return u128::MAX;
        }
    }
    acc
}

/// Visits every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
