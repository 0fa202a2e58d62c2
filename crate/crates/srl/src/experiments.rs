//! Seeded Monte Carlo experiment harnesses.
//!
//! Every experiment is a pure function of its configuration and a master
//! seed: trial `k` draws from `derive_stream(master_seed, k)` and nothing
//! else, so results are independent of execution order and of how many
//! worker threads the `SRL_THREADS` environment variable allows.

use crate::conditions::{compatibility_phi, kernel_cone_intersect};
use crate::ensembles::{
    derive_spiky_params, generate_matrix, perturbation_event_check, ConstraintDiag, EnsembleSpec,
    SpikyParams,
};
use crate::error::{Error, Result};
use crate::linalg::{l1_norm, l2_norm, linf_norm, sub, DenseMatrix};
use crate::lp::DEFAULT_FEAS_TOL;
use crate::rng::{derive_stream, RngStream};
use crate::solvers::{basis_pursuit, competitor_norm, l0_min, lasso, DEFAULT_REC_TOL};
use serde::Serialize;

/// One experiment trial, flattened to key-value pairs for emission.
/// Rerunning with the same seed reproduces the record exactly.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub seed: u64,
    pub params: Vec<(String, f64)>,
    pub outcome: Vec<(String, f64)>,
}

/// Worker-count cap read from `SRL_THREADS`; defaults to the machine
/// parallelism. The value never changes results, only wall time.
fn worker_count(trials: usize) -> usize {
    let default = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("SRL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(default);
    cap.min(trials.max(1))
}

/// Runs `count` independent trials, possibly on several threads, and
/// returns the results in trial order. Errors surface deterministically:
/// the one from the lowest trial index wins.
pub fn run_trials<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if count == 0 {
        return Ok(Vec::new());
    }
    let workers = worker_count(count);
    let mut slots: Vec<Option<Result<T>>> = (0..count).map(|_| None).collect();
    if workers <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
    } else {
        let chunk = count.div_ceil(workers);
        std::thread::scope(|scope| {
            for (w, piece) in slots.chunks_mut(chunk).enumerate() {
                let f = &f;
                scope.spawn(move || {
                    for (off, slot) in piece.iter_mut().enumerate() {
                        *slot = Some(f(w * chunk + off));
                    }
                });
            }
        });
    }
    let mut out = Vec::with_capacity(count);
    for slot in slots {
        out.push(slot.expect("every trial ran")?);
    }
    Ok(out)
}

/// Unit-norm signal with a uniform random support of size `s` and
/// Gaussian coefficients; the pinned trial signal model.
pub fn sparse_unit_signal(dim: usize, s: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    if s == 0 {
        return x;
    }
    loop {
        let support = rng.next_subset(dim, s);
        for &j in &support {
            x[j] = rng.next_gaussian();
        }
        let nrm = l2_norm(&x);
        if nrm > 1e-12 {
            x.iter_mut().for_each(|v| *v /= nrm);
            return x;
        }
        x.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Which recovery procedure a phase sweep exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecoveryKind {
    BasisPursuit,
    L0,
}

/// Configuration of a `(rows, sparsity)` phase sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseConfig {
    pub spec: EnsembleSpec,
    pub recovery: RecoveryKind,
    /// Ambient dimension n.
    pub dim: usize,
    /// Measurement counts to sweep.
    pub rows_list: Vec<usize>,
    /// Sparsity levels to sweep.
    pub sparsity_list: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub rows: usize,
    pub sparsity: usize,
    pub successes: usize,
}

impl PhaseCell {
    pub fn rate(&self, trials: usize) -> f64 {
        self.successes as f64 / trials as f64
    }
}

/// Success counts over the `(rows, sparsity)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseTable {
    pub ensemble: String,
    pub recovery: RecoveryKind,
    pub dim: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub cells: Vec<PhaseCell>,
}

impl PhaseTable {
    pub fn rate_at(&self, rows: usize, sparsity: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.rows == rows && c.sparsity == sparsity)
            .map(|c| c.rate(self.trials))
    }

    pub fn trial_records(&self) -> Vec<TrialRecord> {
        self.cells
            .iter()
            .map(|c| TrialRecord {
                experiment: format!("phase-{:?}", self.recovery).to_lowercase(),
                seed: self.master_seed,
                params: vec![
                    ("n".into(), self.dim as f64),
                    ("N".into(), c.rows as f64),
                    ("s".into(), c.sparsity as f64),
                    ("trials".into(), self.trials as f64),
                ],
                outcome: vec![
                    ("successes".into(), c.successes as f64),
                    ("rate".into(), c.rate(self.trials)),
                ],
            })
            .collect()
    }
}

fn recovery_trial(
    spec: &EnsembleSpec,
    recovery: RecoveryKind,
    dim: usize,
    rows: usize,
    s: usize,
    stream: &RngStream,
) -> Result<bool> {
    let (gamma, _) = generate_matrix(spec, rows, dim, &stream.substream(0), false);
    let mut signal_rng = stream.substream(1);
    let x0 = sparse_unit_signal(dim, s, &mut signal_rng);
    let y = gamma.mul_vec(&x0);
    match recovery {
        RecoveryKind::BasisPursuit => {
            let r = basis_pursuit(&gamma, &y, Some(&x0))?;
            Ok(r.recovered == Some(true))
        }
        RecoveryKind::L0 => {
            let r = l0_min(&gamma, &y, s)?;
            Ok(r.unique
                && r.sparsity == s
                && linf_norm(&sub(&r.solutions[0], &x0)) <= DEFAULT_REC_TOL)
        }
    }
}

/// Sweeps the `(rows, sparsity)` grid: each cell generates fresh matrices
/// and signals, runs the recovery procedure, and counts exact recoveries.
pub fn phase_diagram(config: &PhaseConfig) -> Result<PhaseTable> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mut cells = Vec::new();
    for (cell_idx, (&rows, &s)) in config
        .rows_list
        .iter()
        .flat_map(|r| config.sparsity_list.iter().map(move |s| (r, s)))
        .enumerate()
    {
        if s > config.dim {
            return Err(Error::InvalidParameter(format!(
                "sparsity {s} exceeds dimension {}",
                config.dim
            )));
        }
        let base = (cell_idx * config.trials) as u64;
        let results = run_trials(config.trials, |t| {
            let stream = derive_stream(config.master_seed, base + t as u64);
            recovery_trial(&config.spec, config.recovery, config.dim, rows, s, &stream)
        })?;
        let successes = results.iter().filter(|&&ok| ok).count();
        cells.push(PhaseCell {
            rows,
            sparsity: s,
            successes,
        });
    }
    Ok(PhaseTable {
        ensemble: config.spec.name().to_string(),
        recovery: config.recovery,
        dim: config.dim,
        trials: config.trials,
        master_seed: config.master_seed,
        cells,
    })
}

/// Single-cell l0 sweep; the desk guard keeps the exhaustive search sane.
pub fn l0_experiment(
    spec: &EnsembleSpec,
    dim: usize,
    s: usize,
    rows: usize,
    trials: usize,
    master_seed: u64,
) -> Result<f64> {
    if s > 6 {
        return Err(Error::GuardExceeded(format!(
            "l0_experiment: sparsity {s} exceeds the desk-scale guard of 6"
        )));
    }
    let table = phase_diagram(&PhaseConfig {
        spec: spec.clone(),
        recovery: RecoveryKind::L0,
        dim,
        rows_list: vec![rows],
        sparsity_list: vec![s],
        trials,
        master_seed,
    })?;
    Ok(table.cells[0].rate(trials))
}

/// Configuration of the reconstruction-failure experiment.
#[derive(Debug, Clone)]
pub struct CounterexampleConfig {
    /// Ambient dimension n.
    pub dim: usize,
    /// Measurement count N.
    pub rows: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// Slack for the parameter-window diagnostics.
    pub slack: f64,
    /// Overrides the derived spiky parameters when set.
    pub params_override: Option<SpikyParams>,
}

/// Per-trial outcome of the failure experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleTrial {
    pub trial: usize,
    pub seed: u64,
    /// Minimum l1 cost of reproducing column 1 from the others.
    pub competitor: f64,
    /// True when the competitor certifies reconstruction failure.
    pub failure: bool,
    pub col1_norm: f64,
    pub col1_norm_ok: bool,
    /// Rows without a dedicated spike column.
    pub perturb_rows_missing: usize,
    pub perturb_holds: bool,
    /// Kernel meets the order-1 cone at the first coordinate.
    pub kernel_cone: bool,
    /// Column 1 still spans a vertex of the column body.
    pub col1_vertex: bool,
}

/// Aggregated failure experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleOutcome {
    pub params: SpikyParams,
    pub diagnostics: Vec<ConstraintDiag>,
    pub trials: usize,
    pub master_seed: u64,
    /// Fraction of trials where basis pursuit provably fails on e1.
    pub failure_freq: f64,
    /// Fraction of (trial, row) pairs with a dedicated spike column.
    pub perturbation_row_freq: f64,
    /// Fraction of trials where every row has one.
    pub perturbation_all_freq: f64,
    pub col1_norm_freq: f64,
    pub per_trial: Vec<CounterexampleTrial>,
}

impl CounterexampleOutcome {
    pub fn trial_records(&self) -> Vec<TrialRecord> {
        self.per_trial
            .iter()
            .map(|t| TrialRecord {
                experiment: "counterexample".into(),
                seed: t.seed,
                params: vec![
                    ("n".into(), self.params.n as f64),
                    ("N".into(), self.params.rows as f64),
                    ("delta".into(), self.params.delta),
                    ("spike".into(), self.params.spike),
                ],
                outcome: vec![
                    ("competitor".into(), t.competitor),
                    ("failure".into(), t.failure as u8 as f64),
                    ("col1_norm".into(), t.col1_norm),
                    ("perturb_rows_missing".into(), t.perturb_rows_missing as f64),
                    ("perturb_holds".into(), t.perturb_holds as u8 as f64),
                    ("kernel_cone".into(), t.kernel_cone as u8 as f64),
                    ("col1_vertex".into(), t.col1_vertex as u8 as f64),
                ],
            })
            .collect()
    }
}

/// Generates spiky matrices and certifies, per trial, whether the first
/// basis vector survives basis pursuit: failure holds exactly when some
/// unit-l1 combination of the other columns reproduces column 1. The
/// latent-trace perturbation event and the column-norm leg are recorded
/// alongside, as is the kernel-cone/vertex cross-check.
pub fn counterexample_experiment(config: &CounterexampleConfig) -> Result<CounterexampleOutcome> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let (params, diagnostics) = match &config.params_override {
        Some(p) => (p.clone(), Vec::new()),
        None => {
            let d = derive_spiky_params(config.dim, config.rows, config.slack)?;
            (d.params, d.diagnostics)
        }
    };
    let spec = EnsembleSpec::Spiky(params.clone());
    let rows = config.rows;
    let dim = config.dim;
    let per_trial = run_trials(config.trials, |t| {
        let stream = derive_stream(config.master_seed, t as u64);
        let (gamma, trace) = generate_matrix(&spec, rows, dim, &stream.substream(0), true);
        let trace = trace.expect("spiky generation keeps its trace");

        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        let competitor = competitor_norm(&gamma, &e1, &[0])?;
        let failure = competitor <= 1.0 + DEFAULT_FEAS_TOL;

        let col1_norm = l2_norm(&gamma.column(0));
        let perturb = perturbation_event_check(&trace)?;
        let cone = kernel_cone_intersect(&gamma, &[0], 1.0)?;

        Ok(CounterexampleTrial {
            trial: t,
            seed: config.master_seed,
            competitor,
            failure,
            col1_norm,
            col1_norm_ok: col1_norm <= 1.0 + 1e-9,
            perturb_rows_missing: perturb.missing_rows.len(),
            perturb_holds: perturb.holds,
            kernel_cone: cone.intersects,
            col1_vertex: !failure,
        })
    })?;

    let trials = config.trials as f64;
    let failure_freq = per_trial.iter().filter(|t| t.failure).count() as f64 / trials;
    let missing_total: usize = per_trial.iter().map(|t| t.perturb_rows_missing).sum();
    let perturbation_row_freq = 1.0 - missing_total as f64 / (trials * rows as f64);
    let perturbation_all_freq =
        per_trial.iter().filter(|t| t.perturb_holds).count() as f64 / trials;
    let col1_norm_freq = per_trial.iter().filter(|t| t.col1_norm_ok).count() as f64 / trials;
    Ok(CounterexampleOutcome {
        params,
        diagnostics,
        trials: config.trials,
        master_seed: config.master_seed,
        failure_freq,
        perturbation_row_freq,
        perturbation_all_freq,
        col1_norm_freq,
        per_trial,
    })
}

/// Which scalar law feeds the moment-growth sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentLaw {
    /// The ensemble coordinate itself.
    Coordinate,
    /// The centered square `x^2 - 1`; the law that column-norm
    /// concentration actually depends on.
    SquaredCentered,
}

/// Configuration of the normalized-sum moment experiment.
#[derive(Debug, Clone)]
pub struct MomentConfig {
    pub spec: EnsembleSpec,
    pub law: MomentLaw,
    pub p_list: Vec<f64>,
    /// Summands per normalized sum.
    pub rows: usize,
    /// Independent sums per moment estimate.
    pub mc_samples: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub p: f64,
    /// Monte Carlo L_p norm of the normalized sum.
    pub lhs: f64,
    pub lhs_over_sqrt_p: f64,
    /// Exact standard-normal reference `(E |g|^p)^(1/p)`.
    pub gaussian_ref: f64,
}

/// Lanczos log-gamma (g = 7, n = 9), good to ~1e-13 for positive reals.
fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(z > 0.0);
    let z = z - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Exact `(E |g|^p)^(1/p)` for standard normal `g`:
/// `sqrt(2) (Gamma((p+1)/2) / sqrt(pi))^(1/p)`.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    let ln_moment =
        0.5 * p * 2f64.ln() + ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln();
    (ln_moment / p).exp()
}

/// Estimates `L_p` norms of `rows^{-1/2} sum z_i` by Monte Carlo over
/// `mc_samples` independent sums, for each `p` in the list. Requires
/// `rows >= p^max(2 alpha - 1, 1)`, the regime where the normalized sum
/// keeps subgaussian moment growth.
pub fn moment_growth_experiment(config: &MomentConfig) -> Result<Vec<MomentRow>> {
    if config.mc_samples < 1000 {
        return Err(Error::InvalidParameter(
            "mc_samples must be at least 1000".into(),
        ));
    }
    if config.p_list.is_empty() {
        return Err(Error::InvalidParameter("p_list is empty".into()));
    }
    let alpha = match config.law {
        MomentLaw::Coordinate => config.spec.alpha(),
        MomentLaw::SquaredCentered => 2.0 * config.spec.alpha(),
    };
    let exponent = (2.0 * alpha - 1.0).max(1.0);
    for &p in &config.p_list {
        if p < 2.0 {
            return Err(Error::InvalidParameter(format!("p = {p} below 2")));
        }
        let needed = p.powf(exponent);
        if (config.rows as f64) < needed {
            return Err(Error::InvalidParameter(format!(
                "rows = {} below p^max(2a-1,1) = {needed:.1} at p = {p}",
                config.rows
            )));
        }
    }
    let draw = |rng: &mut RngStream| -> f64 {
        match config.law {
            MomentLaw::Coordinate => config.spec.sample_scalar(rng),
            MomentLaw::SquaredCentered => {
                let x = config.spec.sample_scalar(rng);
                x * x - 1.0
            }
        }
    };
    let scale = 1.0 / (config.rows as f64).sqrt();
    let mut acc = vec![0.0f64; config.p_list.len()];
    for sample in 0..config.mc_samples {
        let mut rng = derive_stream(config.master_seed, sample as u64);
        let mut sum = 0.0;
        for _ in 0..config.rows {
            sum += draw(&mut rng);
        }
        let v = (sum * scale).abs();
        for (slot, &p) in acc.iter_mut().zip(&config.p_list) {
            *slot += v.powf(p);
        }
    }
    Ok(config
        .p_list
        .iter()
        .zip(&acc)
        .map(|(&p, &total)| {
            let lhs = (total / config.mc_samples as f64).powf(1.0 / p);
            MomentRow {
                p,
                lhs,
                lhs_over_sqrt_p: lhs / p.sqrt(),
                gaussian_ref: gaussian_abs_moment(p),
            }
        })
        .collect())
}

/// Noise model of the noisy-recovery experiment, with the pinned
/// regularization rule `lambda = 4 sigma sqrt((t^2 + ln n) / N)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoisyModel {
    pub sigma: f64,
    pub t: f64,
}

impl NoisyModel {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
        }
        if t <= 0.0 {
            return Err(Error::InvalidParameter("t must be positive".into()));
        }
        Ok(NoisyModel { sigma, t })
    }

    pub fn lambda(&self, dim: usize, rows: usize) -> f64 {
        4.0 * self.sigma * ((self.t * self.t + (dim as f64).ln()) / rows as f64).sqrt()
    }
}

/// Configuration of the noisy lasso experiment.
#[derive(Debug, Clone)]
pub struct NoisyLassoConfig {
    pub spec: EnsembleSpec,
    pub dim: usize,
    pub rows: usize,
    pub sparsity: usize,
    pub model: NoisyModel,
    pub trials: usize,
    pub master_seed: u64,
    /// Reuses one matrix for every trial when set.
    pub fixed_gamma: Option<DenseMatrix>,
    /// Pins the regularization weight instead of the model rule.
    pub lambda_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoisyLassoTrial {
    pub trial: usize,
    pub lambda: f64,
    /// Compatibility upper bound at the realized support.
    pub phi: f64,
    pub prediction_error_sq: f64,
    pub prediction_bound: f64,
    pub prediction_ok: bool,
    pub l1_error: f64,
    pub l1_bound: f64,
    pub l1_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoisyLassoOutcome {
    pub trials: usize,
    pub master_seed: u64,
    pub lambda: f64,
    pub prediction_violation_freq: f64,
    pub l1_violation_freq: f64,
    /// The probability budget `2 exp(-t^2/2)` the violations must respect.
    pub violation_budget: f64,
    pub per_trial: Vec<NoisyLassoTrial>,
}

impl NoisyLassoOutcome {
    pub fn trial_records(&self) -> Vec<TrialRecord> {
        self.per_trial
            .iter()
            .map(|t| TrialRecord {
                experiment: "noisy-lasso".into(),
                seed: self.master_seed,
                params: vec![
                    ("trial".into(), t.trial as f64),
                    ("lambda".into(), t.lambda),
                ],
                outcome: vec![
                    ("phi".into(), t.phi),
                    ("prediction_error_sq".into(), t.prediction_error_sq),
                    ("prediction_bound".into(), t.prediction_bound),
                    ("prediction_ok".into(), t.prediction_ok as u8 as f64),
                    ("l1_error".into(), t.l1_error),
                    ("l1_bound".into(), t.l1_bound),
                    ("l1_ok".into(), t.l1_ok as u8 as f64),
                ],
            })
            .collect()
    }
}

const BOUND_SLACK: f64 = 1e-9;

/// Per trial: draw a matrix, an `s`-sparse unit signal and Gaussian noise,
/// run the lasso at the rule's lambda, evaluate the compatibility constant
/// at the realized support, and check the two oracle error bounds
/// (in-sample prediction and l1 estimation). Reports how often either
/// bound fails, to compare with the `2 exp(-t^2/2)` budget.
pub fn noisy_lasso_experiment(config: &NoisyLassoConfig) -> Result<NoisyLassoOutcome> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if config.sparsity > config.dim {
        return Err(Error::InvalidParameter(format!(
            "sparsity {} exceeds dimension {}",
            config.sparsity, config.dim
        )));
    }
    if let Some(g) = &config.fixed_gamma {
        if g.rows() != config.rows || g.cols() != config.dim {
            return Err(Error::DimensionMismatch("fixed matrix shape".into()));
        }
    }
    let lambda = config
        .lambda_override
        .unwrap_or_else(|| config.model.lambda(config.dim, config.rows));
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
    }
    let log_term = config.model.t * config.model.t + (config.dim as f64).ln();
    let sigma = config.model.sigma;
    let rows = config.rows;
    let dim = config.dim;

    let per_trial = run_trials(config.trials, |t| {
        let stream = derive_stream(config.master_seed, t as u64);
        let gamma = match &config.fixed_gamma {
            Some(g) => g.clone(),
            None => generate_matrix(&config.spec, rows, dim, &stream.substream(0), false).0,
        };
        // Unnormalized rows X_i = sqrt(N) * Gamma_i.
        let sqrt_rows = (rows as f64).sqrt();
        let mut x_rows = DenseMatrix::zeros(rows, dim);
        for i in 0..rows {
            for j in 0..dim {
                x_rows.set(i, j, gamma.get(i, j) * sqrt_rows);
            }
        }
        let mut signal_rng = stream.substream(1);
        let x0 = sparse_unit_signal(dim, config.sparsity, &mut signal_rng);
        let support: Vec<usize> = (0..dim).filter(|&j| x0[j] != 0.0).collect();
        let mut noise_rng = stream.substream(2);
        let z: Vec<f64> = x_rows
            .mul_vec(&x0)
            .iter()
            .map(|fit| fit + sigma * noise_rng.next_gaussian())
            .collect();

        let fit = lasso(&x_rows, &z, lambda, 500_000, 1e-8)?;
        let diff = sub(&fit.xhat, &x0);
        let prediction_error_sq = l2_norm(&gamma.mul_vec(&diff)).powi(2);
        let l1_error = l1_norm(&diff);
        // An empty signal zeroes both bounds outright; the compatibility
        // constant only enters through the realized support.
        let (phi_value, prediction_bound, l1_bound) = if support.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            let phi = compatibility_phi(&gamma, 3.0, &support, 20_000)?;
            let sparsity = support.len() as f64;
            let phi_sq = phi.phi_upper * phi.phi_upper;
            (
                phi.phi_upper,
                64.0 * sigma * sigma * sparsity * log_term / (rows as f64 * phi_sq),
                64.0 * sigma * sparsity / phi_sq * (log_term / rows as f64).sqrt(),
            )
        };
        Ok(NoisyLassoTrial {
            trial: t,
            lambda,
            phi: phi_value,
            prediction_error_sq,
            prediction_bound,
            prediction_ok: prediction_error_sq <= prediction_bound + BOUND_SLACK,
            l1_error,
            l1_bound,
            l1_ok: l1_error <= l1_bound + BOUND_SLACK,
        })
    })?;

    let trials = config.trials as f64;
    let prediction_violation_freq =
        per_trial.iter().filter(|t| !t.prediction_ok).count() as f64 / trials;
    let l1_violation_freq = per_trial.iter().filter(|t| !t.l1_ok).count() as f64 / trials;
    Ok(NoisyLassoOutcome {
        trials: config.trials,
        master_seed: config.master_seed,
        lambda,
        prediction_violation_freq,
        l1_violation_freq,
        violation_budget: 2.0 * (-config.model.t * config.model.t / 2.0).exp(),
        per_trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_phase(dim: usize, rows: usize, s: usize, trials: usize, seed: u64) -> f64 {
        let table = phase_diagram(&PhaseConfig {
            spec: EnsembleSpec::Gaussian,
            recovery: RecoveryKind::BasisPursuit,
            dim,
            rows_list: vec![rows],
            sparsity_list: vec![s],
            trials,
            master_seed: seed,
        })
        .unwrap();
        table.cells[0].rate(trials)
    }

    #[test]
    fn square_matrix_always_recovers() {
        let rate = gaussian_phase(16, 16, 3, 20, 11);
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn fewer_rows_than_sparsity_never_recovers() {
        let rate = gaussian_phase(16, 2, 3, 20, 12);
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn phase_tables_are_reproducible() {
        let config = PhaseConfig {
            spec: EnsembleSpec::Gaussian,
            recovery: RecoveryKind::BasisPursuit,
            dim: 24,
            rows_list: vec![8, 16],
            sparsity_list: vec![1, 2],
            trials: 10,
            master_seed: 99,
        };
        let a = phase_diagram(&config).unwrap();
        let b = phase_diagram(&config).unwrap();
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.successes, cb.successes);
        }
    }

    #[test]
    fn phase_independent_of_worker_count() {
        let config = PhaseConfig {
            spec: EnsembleSpec::Gaussian,
            recovery: RecoveryKind::BasisPursuit,
            dim: 24,
            rows_list: vec![12],
            sparsity_list: vec![2],
            trials: 12,
            master_seed: 7,
        };
        // worker_count reads the environment per call; exercise both the
        // sequential and the threaded path explicitly.
        let results_seq = run_trials(12, |t| {
            let stream = derive_stream(7, t as u64);
            recovery_trial(&config.spec, config.recovery, 24, 12, 2, &stream)
        })
        .unwrap();
        let table = phase_diagram(&config).unwrap();
        let successes = results_seq.iter().filter(|&&ok| ok).count();
        assert_eq!(table.cells[0].successes, successes);
    }

    #[test]
    fn l0_two_s_gaussian_rows_always_unique() {
        let rate = l0_experiment(&EnsembleSpec::Gaussian, 8, 2, 4, 30, 21).unwrap();
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn l0_guard() {
        assert!(matches!(
            l0_experiment(&EnsembleSpec::Gaussian, 30, 7, 20, 5, 1),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn rademacher_limit_rarely_fails_at_log_n_rows() {
        // Forcing delta to zero reduces the spiky law to Rademacher; with
        // rows well above log(n) the failure certificate should not fire.
        let params = SpikyParams::from_raw(256, 40, 0.0, 4.0, 1.0);
        let outcome = counterexample_experiment(&CounterexampleConfig {
            dim: 256,
            rows: 40,
            trials: 20,
            master_seed: 5,
            slack: 2.0,
            params_override: Some(params),
        })
        .unwrap();
        assert_eq!(outcome.failure_freq, 0.0, "freq {}", outcome.failure_freq);
    }

    #[test]
    fn counterexample_small_scale_consistency() {
        // Desk-size spiky run; the cross-checks must agree trial by trial.
        let outcome = counterexample_experiment(&CounterexampleConfig {
            dim: 400,
            rows: 4,
            trials: 10,
            master_seed: 17,
            slack: 2.0,
            params_override: None,
        })
        .unwrap();
        for t in &outcome.per_trial {
            assert_eq!(t.col1_vertex, !t.failure);
            if t.failure {
                assert!(
                    t.kernel_cone,
                    "trial {}: failure without cone witness",
                    t.trial
                );
            }
        }
    }

    #[test]
    fn moment_growth_gaussian_matches_exact_moments() {
        let rows = moment_growth_experiment(&MomentConfig {
            spec: EnsembleSpec::Gaussian,
            law: MomentLaw::Coordinate,
            p_list: vec![2.0, 4.0],
            rows: 32,
            mc_samples: 20_000,
            master_seed: 3,
        })
        .unwrap();
        for row in rows {
            assert!(
                (row.lhs - row.gaussian_ref).abs() / row.gaussian_ref < 0.05,
                "p {}: lhs {} vs {}",
                row.p,
                row.lhs,
                row.gaussian_ref
            );
        }
    }

    #[test]
    fn moment_growth_centered_square_of_signs_vanishes() {
        let rows = moment_growth_experiment(&MomentConfig {
            spec: EnsembleSpec::Rademacher,
            law: MomentLaw::SquaredCentered,
            p_list: vec![2.0],
            rows: 16,
            mc_samples: 2000,
            master_seed: 4,
        })
        .unwrap();
        assert_eq!(rows[0].lhs, 0.0);
    }

    #[test]
    fn moment_growth_symexp_ratio_trend() {
        let rows = moment_growth_experiment(&MomentConfig {
            spec: EnsembleSpec::SymExp,
            law: MomentLaw::Coordinate,
            p_list: vec![2.0, 4.0, 8.0],
            rows: 64,
            mc_samples: 40_000,
            master_seed: 6,
        })
        .unwrap();
        assert!(rows[0].lhs_over_sqrt_p >= rows[1].lhs_over_sqrt_p - 0.02);
        assert!(rows[1].lhs_over_sqrt_p >= rows[2].lhs_over_sqrt_p - 0.02);
    }

    #[test]
    fn moment_growth_precondition() {
        let err = moment_growth_experiment(&MomentConfig {
            spec: EnsembleSpec::SymExp,
            law: MomentLaw::Coordinate,
            p_list: vec![16.0],
            rows: 8,
            mc_samples: 1000,
            master_seed: 0,
        })
        .unwrap_err();
        assert!(err.to_string().contains("p^max"), "{err}");
    }

    #[test]
    fn gaussian_moment_reference_values() {
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-12);
        assert!((gaussian_abs_moment(4.0) - 3f64.powf(0.25)).abs() < 1e-12);
        assert!((gaussian_abs_moment(8.0) - 105f64.powf(0.125)).abs() < 1e-12);
        assert!((gaussian_abs_moment(10.0) - 945f64.powf(0.1)).abs() < 1e-12);
    }

    #[test]
    fn noiseless_lasso_predicts_perfectly() {
        let outcome = noisy_lasso_experiment(&NoisyLassoConfig {
            spec: EnsembleSpec::Gaussian,
            dim: 12,
            rows: 12,
            sparsity: 2,
            model: NoisyModel::new(0.0, 2.0).unwrap(),
            trials: 5,
            master_seed: 8,
            fixed_gamma: None,
            lambda_override: None,
        })
        .unwrap();
        assert_eq!(outcome.lambda, 0.0);
        for t in &outcome.per_trial {
            assert!(
                t.prediction_error_sq < 1e-10,
                "trial {}: {}",
                t.trial,
                t.prediction_error_sq
            );
            assert!(t.prediction_ok);
        }
    }

    #[test]
    fn zero_signal_shrinks_to_zero() {
        let outcome = noisy_lasso_experiment(&NoisyLassoConfig {
            spec: EnsembleSpec::Gaussian,
            dim: 12,
            rows: 10,
            sparsity: 0,
            model: NoisyModel::new(0.1, 2.0).unwrap(),
            trials: 5,
            master_seed: 9,
            fixed_gamma: None,
            lambda_override: None,
        })
        .unwrap();
        // With nothing to estimate, both bounds are zero and the penalty
        // must wipe out the pure-noise fit in most trials.
        for t in &outcome.per_trial {
            assert_eq!(t.prediction_bound, 0.0);
            assert_eq!(t.l1_bound, 0.0);
        }
        assert!(
            outcome.prediction_violation_freq <= 0.2,
            "noise-only fits escaped the penalty too often: {}",
            outcome.prediction_violation_freq
        );
    }

    #[test]
    fn run_trials_propagates_lowest_index_error() {
        let r: Result<Vec<usize>> = run_trials(8, |i| {
            if i % 3 == 2 {
                Err(Error::InvalidParameter(format!("trial {i}")))
            } else {
                Ok(i)
            }
        });
        let err = r.unwrap_err();
        assert!(err.to_string().contains("trial 2"), "{err}");
    }
}
