//! Matrix conditions: restricted singular extremes, null space property,
//! small-ball constants, compatibility and restricted eigenvalue
//! constants, sparsity certificates, and the polytope geometry of the
//! column body (vertex census, neighbourliness, inscribed-ball support).
//!
//! Exhaustive support enumeration is the primary mode, protected by hard
//! combinatorial guards. The randomized evaluators (`small_ball_beta`,
//! `rec_kappa_upper`, `ball_in_polytope_support`) are surrogates and say
//! so through their `exact: false` flags.

use crate::error::{Error, Result};
use crate::linalg::{
    binomial, dot, for_each_subset, l1_norm, l2_norm, singular_extremes, DenseMatrix,
};
use crate::lp::{simplex_solve, LpProblem, LpStatus, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};
use crate::rng::RngStream;
use crate::solvers::competitor_norm;
use serde::Serialize;

/// Support-enumeration budget shared by the exhaustive evaluators.
const ENUMERATION_GUARD: u128 = 1_000_000;

/// A strict-inequality question must not be settled by a floating tie.
pub const NSP_MARGIN_TOL: f64 = 1e-8;

fn check_support(gamma: &DenseMatrix, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("support set is empty".into()));
    }
    for &j in support {
        if j >= gamma.cols() {
            return Err(Error::InvalidParameter(format!(
                "support index {j} out of range"
            )));
        }
    }
    for w in support.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidParameter(
                "support must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Exact extremes of the restricted singular values of order `s`:
/// min/max over all supports `|S| = s` of the singular extremes of the
/// column submatrix. The squared minimum is the restricted lower-isometry
/// quantity that small-ball arguments bound from below.
pub fn restricted_sigma_extremes(gamma: &DenseMatrix, s: usize) -> Result<(f64, f64)> {
    let n = gamma.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} outside 1..={n}"
        )));
    }
    let count = binomial(n, s);
    if count > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded(format!(
            "restricted_sigma_extremes: C({n},{s}) = {count} supports exceed {ENUMERATION_GUARD}"
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut failure: Option<Error> = None;
    for_each_subset(n, s, |support| {
        if failure.is_some() {
            return;
        }
        let sub = gamma.select_columns(support);
        match singular_extremes(&sub) {
            Ok((a, b)) => {
                lo = lo.min(a);
                hi = hi.max(b);
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((lo, hi)),
    }
}

/// Restricted isometry defect at order `s`: how far the restricted
/// singular extremes sit from an exact isometry.
pub fn rip_delta(sigma_min_s: f64, sigma_max_s: f64) -> f64 {
    (1.0 - sigma_min_s).max(sigma_max_s - 1.0)
}

/// Solves `max sigma^T v_S` over `Gamma v = 0`, `||v||_1 <= 1` and returns
/// the optimum with its maximizer. The kernel mass that sign patterns can
/// concentrate on small supports is what both the null space property and
/// the cone-intersection tests measure.
fn kernel_l1_max(gamma: &DenseMatrix, support: &[usize], signs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let rows = gamma.rows();
    let n = gamma.cols();
    let cols = 2 * n + 1;
    let mut a = DenseMatrix::zeros(rows + 1, cols);
    for i in 0..rows {
        for j in 0..n {
            let v = gamma.get(i, j);
            a.set(i, j, v);
            a.set(i, n + j, -v);
        }
    }
    for j in 0..cols {
        a.set(rows, j, 1.0);
    }
    let mut rhs = vec![0.0; rows + 1];
    rhs[rows] = 1.0;
    let mut objective = vec![0.0; cols];
    for (&j, &sg) in support.iter().zip(signs) {
        objective[j] = -sg;
        objective[n + j] = sg;
    }
    let sol = simplex_solve(
        &LpProblem::standard(objective, a, rhs),
        DEFAULT_FEAS_TOL,
        DEFAULT_OPT_TOL,
    )?;
    match sol.status {
        LpStatus::Optimal => {
            let parts = sol.x.expect("optimal point");
            let v: Vec<f64> = (0..n).map(|j| parts[j] - parts[n + j]).collect();
            Ok((-sol.objective.expect("objective"), v))
        }
        other => Err(Error::NoSolution(format!(
            "kernel LP must be feasible and bounded, got {other:?}"
        ))),
    }
}

/// Null space property report of order `s`.
#[derive(Debug, Clone, Serialize)]
pub struct NspReport {
    pub holds: bool,
    /// Largest l1 mass any unit-l1 kernel vector places on `s` coordinates.
    pub worst_ratio: f64,
    pub worst_support: Vec<usize>,
    /// The kernel vector achieving the worst ratio (zero if the kernel is
    /// trivial); adversarial signals are built from it.
    pub worst_vector: Vec<f64>,
}

/// Checks the null space property of order `s`: over every support of
/// size `s` and sign pattern, the kernel LP maximizes the signed mass on
/// the support; the property holds when the worst ratio stays strictly
/// below one half (with margin [`NSP_MARGIN_TOL`]). Holding implies exact
/// reconstruction of all `s`-sparse signals by basis pursuit.
pub fn nsp_order_s(gamma: &DenseMatrix, s: usize) -> Result<NspReport> {
    let n = gamma.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} outside 1..={n}"
        )));
    }
    let work = binomial(n, s).saturating_mul(1 << s.min(63));
    if work > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded(format!(
            "nsp_order_s: C({n},{s}) * 2^{s} = {work} LPs exceed {ENUMERATION_GUARD}"
        )));
    }
    let mut worst_ratio = 0.0f64;
    let mut worst_support = Vec::new();
    let mut worst_vector = vec![0.0; n];
    let mut failure: Option<Error> = None;
    for_each_subset(n, s, |support| {
        if failure.is_some() {
            return;
        }
        // Sign patterns up to global flip: the first sign stays positive.
        for pattern in 0..(1u32 << (s - 1)) {
            let signs: Vec<f64> = (0..s)
                .map(|k| {
                    if k == 0 {
                        1.0
                    } else if pattern >> (k - 1) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            match kernel_l1_max(gamma, support, &signs) {
                Ok((value, v)) => {
                    if value > worst_ratio {
                        worst_ratio = value;
                        worst_support = support.to_vec();
                        worst_vector = v;
                    }
                }
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(NspReport {
        holds: worst_ratio < 0.5 - NSP_MARGIN_TOL,
        worst_ratio,
        worst_support,
        worst_vector,
    })
}

/// Monte Carlo estimate flagged as such.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    pub directions: usize,
    pub samples: usize,
    /// Always false: a sampled lower-confidence surrogate, not a proof.
    pub exact: bool,
}

/// Estimates the small-ball constant over `s`-sparse directions: the
/// minimum over sampled unit directions `t` of the empirical frequency of
/// `|<X, t>| > u`. Directions draw a uniform support and a uniform sphere
/// point on it.
pub fn small_ball_beta(
    spec: &crate::ensembles::EnsembleSpec,
    n: usize,
    s: usize,
    u: f64,
    directions: usize,
    samples: usize,
    rng: &mut RngStream,
) -> Result<BetaEstimate> {
    if directions < 100 || samples < 100 {
        return Err(Error::InvalidParameter(
            "small_ball_beta needs at least 100 directions and 100 samples".into(),
        ));
    }
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "sparsity s = {s} outside 1..={n}"
        )));
    }
    if u < 0.0 {
        return Err(Error::InvalidParameter("u must be nonnegative".into()));
    }
    let mut beta_hat = 1.0f64;
    for _ in 0..directions {
        // The support draw fixes the direction's identity; with iid
        // coordinates only the coefficients enter the inner product.
        let _support = rng.next_subset(n, s);
        let mut coef: Vec<f64> = (0..s).map(|_| rng.next_gaussian()).collect();
        let nrm = l2_norm(&coef);
        if nrm == 0.0 {
            continue;
        }
        coef.iter_mut().for_each(|c| *c /= nrm);
        let mut hits = 0usize;
        for _ in 0..samples {
            let mut ip = 0.0;
            for c in &coef {
                ip += c * spec.sample_scalar(rng);
            }
            if ip.abs() > u {
                hits += 1;
            }
        }
        beta_hat = beta_hat.min(hits as f64 / samples as f64);
    }
    Ok(BetaEstimate {
        beta_hat,
        directions,
        samples,
        exact: false,
    })
}

/// Frank-Wolfe upper bound on a compatibility constant, with its duality
/// gap as the certificate of near-optimality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiReport {
    /// `sqrt(|S|)` times the best distance found; an upper bound on phi.
    pub phi_upper: f64,
    /// Final Frank-Wolfe gap in squared-distance units; the true squared
    /// distance is at least `best_sq - gap`.
    pub gap: f64,
    /// True when the gap met the tolerance before the iteration cap.
    pub exact: bool,
}

const PHI_GAP_TOL: f64 = 1e-10;

/// Minimizes `|| sum_i a_i eps_i C_i + sum_j beta_j C_j ||^2` over the
/// product of the weight simplex (the sign-fixed unit-l1 face on `S`) and
/// the `l1` ball of radius `L` off `S`, by pairwise Frank-Wolfe with exact
/// line search. Returns (final squared distance, final gap).
fn phi_pattern_min(
    columns_s: &[Vec<f64>],
    signs: &[f64],
    columns_off: &[Vec<f64>],
    budget: f64,
    iters: usize,
) -> (f64, f64) {
    let dim = columns_s[0].len();
    let offs = columns_off.len();
    // Vertex id: corner i alone (offs == 0), or i * 2*offs + 2j + sign_bit.
    let vertex_image = |id: usize| -> Vec<f64> {
        let mut img = vec![0.0; dim];
        if offs == 0 {
            for (x, c) in img.iter_mut().zip(&columns_s[id]) {
                *x = signs[id] * c;
            }
            return img;
        }
        let i = id / (2 * offs);
        let rest = id % (2 * offs);
        let j = rest / 2;
        let sg = if rest % 2 == 0 { budget } else { -budget };
        for k in 0..dim {
            img[k] = signs[i] * columns_s[i][k] + sg * columns_off[j][k];
        }
        img
    };

    // Start at beta = 0 through an antipodal vertex pair (or a bare corner
    // when there is nothing off the support).
    let mut active: Vec<(usize, f64)> = if offs == 0 {
        vec![(0, 1.0)]
    } else {
        vec![(0, 0.5), (1, 0.5)]
    };
    let mut r = vec![0.0; dim];
    for &(id, w) in &active {
        let img = vertex_image(id);
        for k in 0..dim {
            r[k] += w * img[k];
        }
    }

    let mut gap = f64::INFINITY;
    for it in 0..iters {
        // Linear minimization oracle, decomposed over the two factors.
        let mut best_i = 0;
        let mut best_i_val = f64::INFINITY;
        for (i, col) in columns_s.iter().enumerate() {
            let v = signs[i] * dot(&r, col);
            if v < best_i_val {
                best_i_val = v;
                best_i = i;
            }
        }
        let fw_id = if offs == 0 {
            best_i
        } else {
            let mut best_j = 0;
            let mut best_abs = -1.0;
            for (j, col) in columns_off.iter().enumerate() {
                let v = dot(&r, col);
                if v.abs() > best_abs {
                    best_abs = v.abs();
                    best_j = j;
                }
            }
            let sign_bit = if dot(&r, &columns_off[best_j]) > 0.0 {
                1
            } else {
                0
            };
            best_i * 2 * offs + 2 * best_j + sign_bit
        };
        let fw_img = vertex_image(fw_id);

        // Away vertex: the active one most aligned with the gradient.
        let (away_pos, _) = active
            .iter()
            .enumerate()
            .map(|(pos, &(id, _))| (pos, dot(&r, &vertex_image(id))))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("active set nonempty");
        let (away_id, away_w) = active[away_pos];
        let away_img = vertex_image(away_id);

        gap = 2.0 * (dot(&r, &r) - dot(&r, &fw_img));
        if gap <= PHI_GAP_TOL {
            return (dot(&r, &r), gap.max(0.0));
        }

        let d: Vec<f64> = fw_img.iter().zip(&away_img).map(|(f, a)| f - a).collect();
        let dd = dot(&d, &d);
        if dd == 0.0 {
            return (dot(&r, &r), gap.max(0.0));
        }
        let step = (-dot(&r, &d) / dd).clamp(0.0, away_w);
        if step == 0.0 {
            // Pairwise step blocked by a zero-weight away vertex.
            return (dot(&r, &r), gap.max(0.0));
        }
        for k in 0..dim {
            r[k] += step * d[k];
        }
        active[away_pos].1 -= step;
        if active[away_pos].1 <= 1e-15 {
            active.swap_remove(away_pos);
        }
        match active.iter_mut().find(|(id, _)| *id == fw_id) {
            Some(entry) => entry.1 += step,
            None => active.push((fw_id, step)),
        }
        // Periodic refresh keeps the residual honest over long runs.
        if it % 512 == 511 {
            r.iter_mut().for_each(|x| *x = 0.0);
            for &(id, w) in &active {
                let img = vertex_image(id);
                for k in 0..dim {
                    r[k] += w * img[k];
                }
            }
        }
    }
    (dot(&r, &r), gap.max(0.0))
}

/// Upper-bounds the compatibility constant `phi(L, S)`: `sqrt(|S|)` times
/// the minimal distance between the images of unit-l1 mass on `S` and
/// `L`-bounded l1 mass off `S`. The sign-fixed faces of the l1 sphere are
/// swept exactly (all `2^{|S|-1}` patterns up to global flip); each face
/// yields a convex quadratic minimized by Frank-Wolfe.
pub fn compatibility_phi(
    gamma: &DenseMatrix,
    budget: f64,
    support: &[usize],
    fw_iters: usize,
) -> Result<PhiReport> {
    check_support(gamma, support)?;
    if support.len() > 10 {
        return Err(Error::GuardExceeded(format!(
            "compatibility_phi: |S| = {} exceeds the 2^|S| sweep guard of 10",
            support.len()
        )));
    }
    if budget <= 0.0 {
        return Err(Error::InvalidParameter("budget L must be positive".into()));
    }
    let s = support.len();
    let in_s = {
        let mut mask = vec![false; gamma.cols()];
        for &j in support {
            mask[j] = true;
        }
        mask
    };
    let columns_s: Vec<Vec<f64>> = support.iter().map(|&j| gamma.column(j)).collect();
    let columns_off: Vec<Vec<f64>> = (0..gamma.cols())
        .filter(|&j| !in_s[j])
        .map(|j| gamma.column(j))
        .collect();

    let mut best_sq = f64::INFINITY;
    let mut worst_gap = 0.0f64;
    for pattern in 0..(1u32 << (s - 1)) {
        let signs: Vec<f64> = (0..s)
            .map(|k| {
                if k == 0 {
                    1.0
                } else if pattern >> (k - 1) & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let (sq, gap) = phi_pattern_min(&columns_s, &signs, &columns_off, budget, fw_iters);
        best_sq = best_sq.min(sq);
        worst_gap = worst_gap.max(gap);
    }
    Ok(PhiReport {
        phi_upper: (s as f64).sqrt() * best_sq.max(0.0).sqrt(),
        gap: worst_gap,
        exact: worst_gap <= PHI_GAP_TOL,
    })
}

/// Witnessed answer to "does the kernel meet the cone?".
#[derive(Debug, Clone, Serialize)]
pub struct ConeIntersection {
    pub intersects: bool,
    pub witness: Option<Vec<f64>>,
}

/// Decides whether a nonzero kernel vector `v` satisfies
/// `||v_{S^c}||_1 <= c0 ||v_S||_1`, by checking whether the kernel LP can
/// push the signed mass on `S` up to `1/(1+c0)`. A witness means the
/// restricted eigenvalue constant vanishes for this support and that the
/// compatibility constant `phi(c0, S)` is zero.
pub fn kernel_cone_intersect(
    gamma: &DenseMatrix,
    support: &[usize],
    c0: f64,
) -> Result<ConeIntersection> {
    check_support(gamma, support)?;
    if c0 <= 0.0 {
        return Err(Error::InvalidParameter("c0 must be positive".into()));
    }
    let s = support.len();
    if s > 20 {
        return Err(Error::GuardExceeded(format!(
            "kernel_cone_intersect: |S| = {s} exceeds the sign sweep guard of 20"
        )));
    }
    let threshold = 1.0 / (1.0 + c0) - DEFAULT_FEAS_TOL;
    for pattern in 0..(1u32 << (s - 1)) {
        let signs: Vec<f64> = (0..s)
            .map(|k| {
                if k == 0 {
                    1.0
                } else if pattern >> (k - 1) & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let (value, v) = kernel_l1_max(gamma, support, &signs)?;
        if value >= threshold {
            return Ok(ConeIntersection {
                intersects: true,
                witness: Some(v),
            });
        }
    }
    Ok(ConeIntersection {
        intersects: false,
        witness: None,
    })
}

/// Randomized upper bound on a restricted eigenvalue constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaEstimate {
    pub kappa_upper: f64,
    /// True only for the exact zero certified by a kernel-cone witness.
    pub exact: bool,
}

fn top_m_outside(x: &[f64], s0: &[usize], m: usize) -> Vec<usize> {
    let mut mask = vec![false; x.len()];
    for &j in s0 {
        mask[j] = true;
    }
    let mut outside: Vec<usize> = (0..x.len()).filter(|&j| !mask[j]).collect();
    outside.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).expect("finite"));
    outside.truncate(m);
    outside
}

fn cone_ratio_sq(gamma: &DenseMatrix, x: &[f64], s0: &[usize], m: usize) -> f64 {
    let s1 = top_m_outside(x, s0, m);
    let mut denom = 0.0;
    for &j in s0.iter().chain(&s1) {
        denom += x[j] * x[j];
    }
    if denom == 0.0 {
        return f64::INFINITY;
    }
    let img = gamma.mul_vec(x);
    dot(&img, &img) / denom
}

/// Projects onto the cone by rescaling the off-support mass when it
/// exceeds `c0` times the support mass.
fn cone_project(x: &mut [f64], s0: &[usize], c0: f64) -> bool {
    let mut mask = vec![false; x.len()];
    let mut head = 0.0;
    for &j in s0 {
        mask[j] = true;
        head += x[j].abs();
    }
    if head == 0.0 {
        return false;
    }
    let tail: f64 = (0..x.len()).filter(|&j| !mask[j]).map(|j| x[j].abs()).sum();
    if tail > c0 * head {
        let scale = c0 * head / tail;
        for j in 0..x.len() {
            if !mask[j] {
                x[j] *= scale;
            }
        }
    }
    true
}

/// Randomized multi-start upper bound on the restricted eigenvalue
/// constant `kappa(s, m, c0)`: the best ratio `||Gamma x||_2 / ||x_{S01}||_2`
/// found by projected descent over cone points, with `S1` recomputed as
/// the top-`m` outside coordinates at every step. Reports an exact zero
/// when a kernel-cone witness exists for some support (searched
/// exhaustively while the guard allows).
pub fn rec_kappa_upper(
    gamma: &DenseMatrix,
    s: usize,
    m: usize,
    c0: f64,
    restarts: usize,
    rng: &mut RngStream,
) -> Result<KappaEstimate> {
    let n = gamma.cols();
    if s == 0 || m == 0 || s + m > n {
        return Err(Error::InvalidParameter(format!(
            "restricted eigenvalue orders need s, m >= 1 and s + m <= n; got s={s}, m={m}, n={n}"
        )));
    }
    if c0 <= 0.0 {
        return Err(Error::InvalidParameter("c0 must be positive".into()));
    }
    // Exact-zero rule first: a kernel vector in the cone pins kappa to 0.
    let scan = binomial(n, s).saturating_mul(1 << s.min(63));
    if scan <= ENUMERATION_GUARD {
        let mut hit = false;
        let mut failure: Option<Error> = None;
        for_each_subset(n, s, |support| {
            if hit || failure.is_some() {
                return;
            }
            match kernel_cone_intersect(gamma, support, c0) {
                Ok(c) => hit = c.intersects,
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if hit {
            return Ok(KappaEstimate {
                kappa_upper: 0.0,
                exact: true,
            });
        }
    }

    let mut best = f64::INFINITY;
    for _ in 0..restarts.max(1) {
        let s0 = rng.next_subset(n, s);
        let mut x: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        // Push the start into the cone and onto the unit sphere.
        if !cone_project(&mut x, &s0, c0) {
            continue;
        }
        let nrm = l2_norm(&x);
        if nrm == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        let mut q = cone_ratio_sq(gamma, &x, &s0, m);
        best = best.min(q);
        let mut step = 0.5;
        for _ in 0..120 {
            // Gradient of ||Gamma x||^2 / ||x_P||^2 with the active P frozen.
            let s1 = top_m_outside(&x, &s0, m);
            let mut in_p = vec![false; n];
            for &j in s0.iter().chain(&s1) {
                in_p[j] = true;
            }
            let denom: f64 = (0..n).filter(|&j| in_p[j]).map(|j| x[j] * x[j]).sum();
            if denom == 0.0 {
                break;
            }
            let img = gamma.mul_vec(&x);
            let gtg = gamma.tr_mul_vec(&img);
            let ratio = dot(&img, &img) / denom;
            let grad: Vec<f64> = (0..n)
                .map(|j| 2.0 / denom * (gtg[j] - if in_p[j] { ratio * x[j] } else { 0.0 }))
                .collect();
            let gnorm = l2_norm(&grad);
            if gnorm < 1e-14 {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                let mut cand: Vec<f64> = x.iter().zip(&grad).map(|(v, g)| v - step * g).collect();
                if cone_project(&mut cand, &s0, c0) {
                    let nrm = l2_norm(&cand);
                    if nrm > 0.0 {
                        cand.iter_mut().for_each(|v| *v /= nrm);
                        let qc = cone_ratio_sq(gamma, &cand, &s0, m);
                        if qc < q {
                            x = cand;
                            q = qc;
                            best = best.min(q);
                            improved = true;
                            step *= 1.5;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
    }
    Ok(KappaEstimate {
        kappa_upper: best.max(0.0).sqrt(),
        exact: false,
    })
}

/// Output of the lower-isometry certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SparsityCertificate {
    /// Exact restricted lower singular value at the probed order.
    pub lower_isometry: f64,
    /// Largest column norm.
    pub column_bound: f64,
    /// Order of guaranteed exact reconstruction; zero means no guarantee.
    pub guaranteed_order: usize,
}

/// Certificate from two checkable quantities: the restricted lower
/// singular value `c0` at order `s` and the column-norm bound `c1`.
/// Exact reconstruction is then guaranteed at order
/// `floor(c0^2 (s-1) / (4 c1^2)) - 1`, clamped at zero.
pub fn sparsity_certificate(gamma: &DenseMatrix, s: usize) -> Result<SparsityCertificate> {
    let (c0, _) = restricted_sigma_extremes(gamma, s)?;
    let mut c1 = 0.0f64;
    for j in 0..gamma.cols() {
        c1 = c1.max(l2_norm(&gamma.column(j)));
    }
    let guaranteed_order = if c1 == 0.0 {
        0
    } else {
        let raw = (c0 * c0 * (s as f64 - 1.0)) / (4.0 * c1 * c1);
        (raw.floor() as i64 - 1).max(0) as usize
    };
    Ok(SparsityCertificate {
        lower_isometry: c0,
        column_bound: c1,
        guaranteed_order,
    })
}

/// Right-hand side of the empirical-method lower bound: with `lambda` a
/// certified restricted lower bound of order `s`,
/// `||Gamma y||^2 >= lambda^2 ||y||^2 - (||y||_1^2/(s-1)) (sum_j ||Gamma e_j||^2 mu_j - lambda^2)`
/// where `mu_j = |y_j| / ||y||_1`.
pub fn maurey_rhs(gamma: &DenseMatrix, y: &[f64], s: usize, lambda: f64) -> Result<f64> {
    if gamma.cols() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} columns but y has length {}",
            gamma.cols(),
            y.len()
        )));
    }
    if s < 2 {
        return Err(Error::InvalidParameter("s must be at least 2".into()));
    }
    let y1 = l1_norm(y);
    if y1 == 0.0 {
        return Err(Error::InvalidParameter("y must be nonzero".into()));
    }
    let y2 = l2_norm(y);
    let mut weighted = 0.0;
    for (j, &yj) in y.iter().enumerate() {
        if yj != 0.0 {
            let col_sq = gamma.column(j).iter().map(|v| v * v).sum::<f64>();
            weighted += col_sq * yj.abs() / y1;
        }
    }
    Ok(lambda * lambda * y2 * y2 - y1 * y1 / (s as f64 - 1.0) * (weighted - lambda * lambda))
}

/// Vertex census of the centrally symmetric column body.
#[derive(Debug, Clone, Serialize)]
pub struct VertexCensus {
    pub num_vertices: usize,
    pub non_vertex_columns: Vec<usize>,
}

/// Whether `+-column j` are vertices of the column body: true exactly when
/// no unit-l1 combination of the other columns reproduces the column
/// (competitor norm above `1 + feas_tol`).
pub fn column_is_vertex(gamma: &DenseMatrix, j: usize) -> Result<bool> {
    let mut v = vec![0.0; gamma.cols()];
    v[j] = 1.0;
    let c = competitor_norm(gamma, &v, &[j])?;
    Ok(c > 1.0 + DEFAULT_FEAS_TOL)
}

/// Counts the vertices of the column body by testing every column with
/// one LP. A full census at `2n` vertices plus neighbourliness is the
/// polytope characterization of exact reconstruction.
pub fn vertex_census(gamma: &DenseMatrix) -> Result<VertexCensus> {
    let n = gamma.cols();
    if n > 10_000 {
        return Err(Error::GuardExceeded(format!(
            "vertex_census: {n} columns exceed the one-LP-per-column guard of 10000"
        )));
    }
    let mut non_vertex_columns = Vec::new();
    for j in 0..n {
        if !column_is_vertex(gamma, j)? {
            non_vertex_columns.push(j);
        }
    }
    Ok(VertexCensus {
        num_vertices: 2 * (n - non_vertex_columns.len()),
        non_vertex_columns,
    })
}

/// Neighbourliness verdict with the first violating face, if any.
#[derive(Debug, Clone, Serialize)]
pub struct NeighbourlyReport {
    pub neighbourly: bool,
    /// A support and sign pattern whose face meets the hull of the other
    /// columns, when one exists.
    pub violating: Option<(Vec<usize>, Vec<f64>)>,
}

/// Feasibility LP for one face: can convex weights on the signed columns
/// of `S` meet the absolute convex hull of the remaining columns?
fn face_meets_hull(gamma: &DenseMatrix, support: &[usize], signs: &[f64]) -> Result<bool> {
    let rows = gamma.rows();
    let n = gamma.cols();
    let s = support.len();
    let mut mask = vec![false; n];
    for &j in support {
        mask[j] = true;
    }
    let off: Vec<usize> = (0..n).filter(|&j| !mask[j]).collect();
    let k = off.len();
    // Variables: a (s weights), d+ (k), d- (k), slack t.
    let cols = s + 2 * k + 1;
    let mut a = DenseMatrix::zeros(rows + 2, cols);
    for i in 0..rows {
        for (idx, &j) in support.iter().enumerate() {
            a.set(i, idx, signs[idx] * gamma.get(i, j));
        }
        for (idx, &j) in off.iter().enumerate() {
            let v = gamma.get(i, j);
            a.set(i, s + idx, -v);
            a.set(i, s + k + idx, v);
        }
    }
    for idx in 0..s {
        a.set(rows, idx, 1.0);
    }
    for idx in 0..(2 * k + 1) {
        a.set(rows + 1, s + idx, 1.0);
    }
    let mut rhs = vec![0.0; rows + 2];
    rhs[rows] = 1.0;
    rhs[rows + 1] = 1.0;
    let sol = simplex_solve(
        &LpProblem::standard(vec![0.0; cols], a, rhs),
        DEFAULT_FEAS_TOL,
        DEFAULT_OPT_TOL,
    )?;
    Ok(sol.status == LpStatus::Optimal)
}

/// Checks `s`-neighbourliness of the column body: every face spanned by up
/// to `s` signed columns must avoid the absolute convex hull of the rest.
/// Equivalent to all compatibility constants `phi(1, S)` being positive,
/// which tests cross-assert.
pub fn neighbourly_check(gamma: &DenseMatrix, s: usize) -> Result<NeighbourlyReport> {
    let n = gamma.cols();
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} outside 1..={n}"
        )));
    }
    let mut work: u128 = 0;
    for k in 1..=s {
        work = work.saturating_add(binomial(n, k).saturating_mul(1 << k.min(63)));
    }
    if work > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded(format!(
            "neighbourly_check: {work} face LPs exceed {ENUMERATION_GUARD}"
        )));
    }
    for k in 1..=s {
        let mut violation: Option<(Vec<usize>, Vec<f64>)> = None;
        let mut failure: Option<Error> = None;
        for_each_subset(n, k, |support| {
            if violation.is_some() || failure.is_some() {
                return;
            }
            for pattern in 0..(1u32 << (k - 1)) {
                let signs: Vec<f64> = (0..k)
                    .map(|t| {
                        if t == 0 {
                            1.0
                        } else if pattern >> (t - 1) & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    })
                    .collect();
                match face_meets_hull(gamma, support, &signs) {
                    Ok(true) => {
                        violation = Some((support.to_vec(), signs));
                        return;
                    }
                    Ok(false) => {}
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if violation.is_some() {
            return Ok(NeighbourlyReport {
                neighbourly: false,
                violating: violation,
            });
        }
    }
    Ok(NeighbourlyReport {
        neighbourly: true,
        violating: None,
    })
}

/// Monte Carlo upper bound on the inscribed-ball radius of the absolute
/// convex hull of the given points: the minimum over sampled unit
/// directions of the support function `max_j |<v_j, w>|`. Inexact by
/// construction; more directions only tighten it downward.
pub fn ball_in_polytope_support(
    columns: &[Vec<f64>],
    directions: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if columns.is_empty() {
        return Err(Error::InvalidParameter("no columns".into()));
    }
    if directions < 1000 {
        return Err(Error::InvalidParameter(
            "at least 1000 directions required".into(),
        ));
    }
    let dim = columns[0].len();
    if columns.iter().any(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch("columns of unequal length".into()));
    }
    let mut min_support = f64::INFINITY;
    for _ in 0..directions {
        let mut w: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
        let nrm = l2_norm(&w);
        if nrm == 0.0 {
            continue;
        }
        w.iter_mut().for_each(|v| *v /= nrm);
        let mut support = 0.0f64;
        for col in columns {
            support = support.max(dot(col, &w).abs());
        }
        min_support = min_support.min(support);
    }
    Ok(min_support)
}

/// Everything the `conditions` command reports about one matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub order: usize,
    pub restricted_sigma_min: f64,
    pub restricted_sigma_max: f64,
    pub rip_delta: f64,
    pub nsp: NspReport,
    pub nsp_margin: f64,
    pub certificate: SparsityCertificate,
    pub beta: BetaEstimate,
    pub phi: PhiReport,
    pub phi_support: Vec<usize>,
    pub kappa: KappaEstimate,
    pub vertices: VertexCensus,
    pub neighbourly: NeighbourlyReport,
    /// True for the entries computed by exhaustive enumeration.
    pub exact_enumeration: bool,
}

/// Parameters for [`condition_report`].
#[derive(Debug, Clone)]
pub struct ConditionQuery {
    pub s: usize,
    pub u: f64,
    pub budget_l: f64,
    pub c0: f64,
    pub m: usize,
    pub directions: usize,
    pub samples: usize,
    pub fw_iters: usize,
    pub restarts: usize,
}

/// Runs every evaluator on one matrix and aggregates the results. All the
/// exhaustive parts respect their guards and error out rather than
/// degrade silently.
pub fn condition_report(
    gamma: &DenseMatrix,
    spec: &crate::ensembles::EnsembleSpec,
    q: &ConditionQuery,
    rng: &mut RngStream,
) -> Result<ConditionReport> {
    let (smin, smax) = restricted_sigma_extremes(gamma, q.s)?;
    let nsp = nsp_order_s(gamma, q.s)?;
    let certificate = sparsity_certificate(gamma, q.s)?;
    let beta = small_ball_beta(spec, gamma.cols(), q.s, q.u, q.directions, q.samples, rng)?;
    let phi_support: Vec<usize> = (0..q.s).collect();
    let phi = compatibility_phi(gamma, q.budget_l, &phi_support, q.fw_iters)?;
    let kappa = rec_kappa_upper(gamma, q.s, q.m, q.c0, q.restarts, rng)?;
    let vertices = vertex_census(gamma)?;
    let neighbourly = neighbourly_check(gamma, q.s)?;
    Ok(ConditionReport {
        order: q.s,
        restricted_sigma_min: smin,
        restricted_sigma_max: smax,
        rip_delta: rip_delta(smin, smax),
        nsp_margin: 0.5 - nsp.worst_ratio,
        nsp,
        certificate,
        beta,
        phi,
        phi_support,
        kappa,
        vertices,
        neighbourly,
        exact_enumeration: true,
    })
}
