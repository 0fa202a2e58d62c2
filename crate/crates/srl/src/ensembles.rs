//! Measurement-row distributions and matrix generation.
//!
//! Four coordinate laws are supported, all scaled to unit variance:
//! Gaussian, Rademacher, symmetric exponential, and the spiky law
//! `eps * (1 + R*eta)` (a Rademacher sign carrying a rare spike of height
//! `R` with probability `delta`), normalized by its L2 norm. The spiky law
//! is the heavy-tailed construction whose matrices defeat basis pursuit
//! while remaining fine for l0 recovery.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::RngStream;
use serde::Serialize;

/// Parameters of the spiky coordinate law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikyParams {
    /// Ambient dimension the parameters were derived for.
    pub n: usize,
    /// Measurement count the parameters were derived for.
    pub rows: usize,
    /// Spike probability, in [0, 1).
    pub delta: f64,
    /// Moment horizon: L_q norms stay subgaussian for q up to about p.
    pub p: f64,
    /// Spike height.
    pub spike: f64,
    /// L2 norm of the unnormalized coordinate, (1 + ((1+R)^2 - 1) delta)^(1/2).
    pub l2_norm_z: f64,
}

impl SpikyParams {
    /// Spiky law with explicit `delta` and moment horizon `p`; the spike
    /// height keeps the derived form `sqrt(p) * (1/delta)^(1/p)`.
    pub fn with_delta(n: usize, rows: usize, delta: f64, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "delta {delta} outside [0, 1)"
            )));
        }
        if p <= 2.0 {
            return Err(Error::InvalidParameter(format!(
                "moment horizon p {p} must exceed 2"
            )));
        }
        let spike = if delta > 0.0 {
            p.sqrt() * (1.0 / delta).powf(1.0 / p)
        } else {
            1.0
        };
        Ok(Self::from_raw(n, rows, delta, p, spike))
    }

    /// Spiky law with every parameter pinned by the caller.
    pub fn from_raw(n: usize, rows: usize, delta: f64, p: f64, spike: f64) -> Self {
        let l2_norm_z = (1.0 + ((1.0 + spike).powi(2) - 1.0) * delta).sqrt();
        SpikyParams {
            n,
            rows,
            delta,
            p,
            spike,
            l2_norm_z,
        }
    }

    /// One draw of the normalized coordinate; sign first, then selector.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let sign = rng.next_sign();
        let spike = if self.delta > 0.0 && rng.next_bernoulli(self.delta) {
            self.spike
        } else {
            0.0
        };
        sign * (1.0 + spike) / self.l2_norm_z
    }
}

/// One constraint of the parameter-selection window, with its measured
/// value and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintDiag {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Derived spiky parameters together with the window diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SpikyDerivation {
    pub params: SpikyParams,
    pub diagnostics: Vec<ConstraintDiag>,
}

/// Pins the spiky parameters for dimensions `(n, rows)`:
/// `delta = ln(rows)/n`, `p = ln(n)/ln(rows)`, `spike = sqrt(p) (1/delta)^(1/p)`.
///
/// The selection window is reported as diagnostics rather than enforced:
/// each constraint comes back with its numeric value, the `slack`-scaled
/// threshold, and a flag. Only `p <= 2` (dimension too small relative to
/// the row count) is a hard error.
pub fn derive_spiky_params(n: usize, rows: usize, slack: f64) -> Result<SpikyDerivation> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!("n = {n} below minimum 16")));
    }
    if rows < 2 {
        return Err(Error::InvalidParameter(format!(
            "rows = {rows} below minimum 2"
        )));
    }
    if slack < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "slack = {slack} must be >= 1"
        )));
    }
    let nf = n as f64;
    let rf = rows as f64;
    let delta = rf.ln() / nf;
    let p = nf.ln() / rf.ln();
    if p <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "moment horizon p = ln(n)/ln(rows) = {p:.4} <= 2; n too small relative to rows"
        )));
    }
    let params = SpikyParams::with_delta(n, rows, delta, p)?;
    let spike = params.spike;
    let window_hi = slack * (1.0 / rf).min((std::f64::consts::E * nf / rf).ln() / rf);
    let diagnostics = vec![
        ConstraintDiag {
            name: "spike_height_at_least_2N",
            value: spike,
            threshold: 2.0 * rf,
            satisfied: spike >= 2.0 * rf,
        },
        ConstraintDiag {
            name: "delta_within_window",
            value: delta,
            threshold: window_hi,
            satisfied: delta <= window_hi,
        },
        ConstraintDiag {
            name: "fourth_moment_product_R4_delta",
            value: spike.powi(4) * delta,
            threshold: slack,
            satisfied: spike.powi(4) * delta <= slack,
        },
        ConstraintDiag {
            name: "moment_horizon_vs_log_inverse_delta",
            value: p,
            threshold: 2.0 * (1.0 / delta).ln(),
            satisfied: p <= 2.0 * (1.0 / delta).ln(),
        },
    ];
    Ok(SpikyDerivation {
        params,
        diagnostics,
    })
}

/// A measurement-row distribution with unit-variance coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EnsembleSpec {
    Gaussian,
    Rademacher,
    /// sign * Exp(1) / sqrt(2), so that E x^2 = 1.
    SymExp,
    Spiky(SpikyParams),
    /// Degenerate constant-1 law; a test hook, not a measurement model.
    ConstantOne,
}

impl EnsembleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleSpec::Gaussian => "gaussian",
            EnsembleSpec::Rademacher => "rademacher",
            EnsembleSpec::SymExp => "symexp",
            EnsembleSpec::Spiky(_) => "spiky",
            EnsembleSpec::ConstantOne => "constant1",
        }
    }

    /// Moment growth exponent alpha in `||x||_Lp <= kappa * p^alpha`.
    pub fn alpha(&self) -> f64 {
        match self {
            EnsembleSpec::SymExp => 1.0,
            _ => 0.5,
        }
    }

    /// One coordinate draw.
    pub fn sample_scalar(&self, rng: &mut RngStream) -> f64 {
        match self {
            EnsembleSpec::Gaussian => rng.next_gaussian(),
            EnsembleSpec::Rademacher => rng.next_sign(),
            EnsembleSpec::SymExp => rng.next_sign() * rng.next_exp() / std::f64::consts::SQRT_2,
            EnsembleSpec::Spiky(p) => p.sample(rng),
            EnsembleSpec::ConstantOne => 1.0,
        }
    }
}

/// A measurement row: `n` iid coordinates of the given law.
pub fn sample_row(spec: &EnsembleSpec, n: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..n).map(|_| spec.sample_scalar(rng)).collect()
}

/// Latent sign and selector matrices behind a spiky generation; enough to
/// reconstruct the matrix entry by entry.
#[derive(Debug, Clone)]
pub struct SpikyTrace {
    pub epsilon: DenseMatrix,
    pub eta: DenseMatrix,
    pub params: SpikyParams,
}

impl SpikyTrace {
    /// Entry (i, j) of the normalized measurement matrix this trace
    /// generated: `eps (1 + R eta) / (l2_norm_z sqrt(rows))`.
    pub fn reconstruct_entry(&self, i: usize, j: usize) -> f64 {
        let eps = self.epsilon.get(i, j);
        let eta = self.eta.get(i, j);
        eps * (1.0 + self.params.spike * eta)
            / (self.params.l2_norm_z * (self.epsilon.rows() as f64).sqrt())
    }
}

/// Generates the `rows x n` measurement matrix whose row `i` is an iid
/// draw of the law scaled by `1/sqrt(rows)`. Row `i` draws from
/// `stream.substream(i)`, so concurrent generation is schedule-independent.
/// For the spiky law with `keep_trace`, the latent (sign, selector)
/// matrices are returned alongside.
pub fn generate_matrix(
    spec: &EnsembleSpec,
    rows: usize,
    n: usize,
    stream: &RngStream,
    keep_trace: bool,
) -> (DenseMatrix, Option<SpikyTrace>) {
    let scale = 1.0 / (rows as f64).sqrt();
    let mut gamma = DenseMatrix::zeros(rows, n);
    match spec {
        EnsembleSpec::Spiky(p) if keep_trace => {
            let mut eps_m = DenseMatrix::zeros(rows, n);
            let mut eta_m = DenseMatrix::zeros(rows, n);
            for i in 0..rows {
                let mut rng = stream.substream(i as u64);
                for j in 0..n {
                    let sign = rng.next_sign();
                    let spiked = p.delta > 0.0 && rng.next_bernoulli(p.delta);
                    eps_m.set(i, j, sign);
                    eta_m.set(i, j, if spiked { 1.0 } else { 0.0 });
                    let height = if spiked { p.spike } else { 0.0 };
                    gamma.set(i, j, sign * (1.0 + height) / p.l2_norm_z * scale);
                }
            }
            let trace = SpikyTrace {
                epsilon: eps_m,
                eta: eta_m,
                params: p.clone(),
            };
            (gamma, Some(trace))
        }
        _ => {
            for i in 0..rows {
                let mut rng = stream.substream(i as u64);
                for j in 0..n {
                    gamma.set(i, j, spec.sample_scalar(&mut rng) * scale);
                }
            }
            (gamma, None)
        }
    }
}

/// Exact `||z||_Lq / ||z||_L2` of the unnormalized spiky coordinate:
/// `(1 + ((1+R)^q - 1) delta)^(1/q) / (1 + ((1+R)^2 - 1) delta)^(1/2)`.
/// Evaluated in the log domain so large `q` cannot overflow.
pub fn spiky_lq_ratio(params: &SpikyParams, q: f64) -> Result<f64> {
    if q < 2.0 {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 2")));
    }
    let a = q * (1.0 + params.spike).ln();
    let ln_num = if params.delta == 0.0 {
        0.0
    } else {
        let shifted = a + params.delta.ln();
        if shifted > 690.0 {
            // (e^a - 1) delta dominates the 1.
            shifted / q
        } else {
            (a.exp_m1() * params.delta).ln_1p() / q
        }
    };
    Ok((ln_num - params.l2_norm_z.ln()).exp())
}

/// Monte Carlo `(mean |x|^q)^(1/q)` over iid scalar draws of the law.
pub fn empirical_lq_norm(
    spec: &EnsembleSpec,
    q: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 1")));
    }
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "samples = {samples} below minimum 1000"
        )));
    }
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += spec.sample_scalar(rng).abs().powf(q);
    }
    Ok((acc / samples as f64).powf(1.0 / q))
}

/// Per-row probability that some column beyond the first carries a
/// selector hit in that row and in no other:
/// `1 - (1 - (1-delta)^(rows-1) delta)^(n-1)`, in the log domain.
pub fn selector_event_prob(delta: f64, rows: usize, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside [0, 1]"
        )));
    }
    if rows < 1 || n < 1 {
        return Err(Error::InvalidParameter(
            "rows and n must be positive".into(),
        ));
    }
    if n == 1 || delta == 0.0 {
        return Ok(0.0);
    }
    let single = delta * ((rows as f64 - 1.0) * (-delta).ln_1p()).exp();
    if single == 0.0 {
        return Ok(0.0);
    }
    Ok(-((n as f64 - 1.0) * (-single).ln_1p()).exp_m1())
}

/// Outcome of the perturbation-event check on a spiky trace.
#[derive(Debug, Clone)]
pub struct PerturbationEvent {
    /// True when every row has a dedicated spike column (index >= 1).
    pub holds: bool,
    pub missing_rows: Vec<usize>,
}

/// Checks whether, for every row `i`, some column `j >= 1` has its
/// selector set in row `i` and clear in every other row. Such a column
/// hands row `i` its own spike, which is what pushes the column polytope
/// out to a large ball.
pub fn perturbation_event_check(trace: &SpikyTrace) -> Result<PerturbationEvent> {
    let rows = trace.eta.rows();
    let n = trace.eta.cols();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "trace needs at least 2 columns".into(),
        ));
    }
    let mut served = vec![false; rows];
    for j in 1..n {
        let mut count = 0;
        let mut row_hit = 0;
        for i in 0..rows {
            if trace.eta.get(i, j) != 0.0 {
                count += 1;
                row_hit = i;
                if count > 1 {
                    break;
                }
            }
        }
        if count == 1 {
            served[row_hit] = true;
        }
    }
    let missing_rows: Vec<usize> = (0..rows).filter(|&i| !served[i]).collect();
    Ok(PerturbationEvent {
        holds: missing_rows.is_empty(),
        missing_rows,
    })
}
