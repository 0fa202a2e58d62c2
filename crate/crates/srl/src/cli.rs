//! Command-line front end: flag parsing, experiment dispatch, and
//! deterministic CSV/JSON emission.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical or guard error.

use crate::conditions::{condition_report, ConditionQuery};
use crate::ensembles::{derive_spiky_params, generate_matrix, EnsembleSpec, SpikyDerivation};
use crate::error::Error;
use crate::experiments::{
    counterexample_experiment, moment_growth_experiment, noisy_lasso_experiment, phase_diagram,
    CounterexampleConfig, MomentConfig, MomentLaw, NoisyLassoConfig, NoisyModel, PhaseCell,
    PhaseConfig, RecoveryKind,
};
use crate::report::{bool_field, emit, fmt_real, int_field, u64_field, Csv};
use crate::rng::derive_stream;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

const USAGE: &str = "\
srl: sparse recovery experiments

USAGE:
  srl <command> [flags]

COMMANDS:
  gen             Generate one measurement matrix
  phase           Basis-pursuit recovery rates over an (N, s) grid
  l0-phase        l0-minimization recovery rates over an (N, s) grid
  counterexample  Spiky-ensemble reconstruction-failure experiment
  conditions      Matrix condition report for one generated matrix
  noisy-lasso     Lasso error-bound experiment under Gaussian noise
  moments         L_p norms of normalized coordinate sums

COMMON FLAGS:
  --seed U64          Master seed (default 0)
  --n INT             Ambient dimension
  --N INT             Measurement count
  --N-list A,B,..     Measurement counts for grid commands
  --s INT             Sparsity
  --s-list A,B,..     Sparsity levels for grid commands
  --trials INT        Trials per cell / samples for moments
  --ensemble NAME     gaussian | rademacher | symexp | spiky
  --out PATH          Output file (stdout when omitted); written atomically
  --format FMT        csv | json (default: csv for tables, json for reports)

COMMAND FLAGS:
  conditions:    --u REAL --L REAL --c0 REAL --directions INT
  noisy-lasso:   --sigma REAL --t REAL [--lambda REAL]
  moments:       --p-list A,B,..

EXAMPLES:
  srl phase --ensemble gaussian --n 64 --N-list 8,16,24,32 --s-list 1,2,3 \\
      --trials 50 --seed 7 --out phase.csv
  srl counterexample --n 10000 --N 4 --trials 100 --seed 1
  srl moments --ensemble gaussian --p-list 2,4,8 --N 64 --trials 100000
";

enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}\n\n{USAGE}");
            1
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Flags {
    values: BTreeMap<String, String>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("unexpected argument '{arg}'")))?;
            if !allowed.contains(&name) {
                return Err(CliError::Usage(format!("unknown flag '--{name}'")));
            }
            let value = it
                .next()
                .ok_or_else(|| CliError::Usage(format!("missing value for '--{name}'")))?;
            if values.insert(name.to_string(), value.clone()).is_some() {
                return Err(CliError::Usage(format!("duplicate flag '--{name}'")));
            }
        }
        Ok(Flags { values })
    }

    fn required(&self, name: &str) -> CliResult<&str> {
        self.values
            .get(name)
            .map(|s| s.as_str())
            .ok_or_else(|| CliError::Usage(format!("missing required flag '--{name}'")))
    }

    fn optional(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn usize_req(&self, name: &str) -> CliResult<usize> {
        parse_num(self.required(name)?, name)
    }

    fn u64_or(&self, name: &str, default: u64) -> CliResult<u64> {
        match self.optional(name) {
            Some(v) => parse_num(v, name),
            None => Ok(default),
        }
    }

    fn f64_req(&self, name: &str) -> CliResult<f64> {
        parse_num(self.required(name)?, name)
    }

    fn f64_or(&self, name: &str, default: f64) -> CliResult<f64> {
        match self.optional(name) {
            Some(v) => parse_num(v, name),
            None => Ok(default),
        }
    }

    fn usize_or(&self, name: &str, default: usize) -> CliResult<usize> {
        match self.optional(name) {
            Some(v) => parse_num(v, name),
            None => Ok(default),
        }
    }

    fn list_req<T: std::str::FromStr>(&self, name: &str) -> CliResult<Vec<T>> {
        let raw = self.required(name)?;
        raw.split(',')
            .map(|piece| {
                piece.trim().parse::<T>().map_err(|_| {
                    CliError::Usage(format!("could not parse '{piece}' in '--{name}'"))
                })
            })
            .collect()
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.optional("out").map(PathBuf::from)
    }

    fn format_or(&self, default: &str) -> CliResult<String> {
        let fmt = self.optional("format").unwrap_or(default);
        match fmt {
            "csv" | "json" => Ok(fmt.to_string()),
            other => Err(CliError::Usage(format!(
                "unknown format '{other}' (csv | json)"
            ))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(raw: &str, name: &str) -> CliResult<T> {
    raw.parse::<T>()
        .map_err(|_| CliError::Usage(format!("could not parse '{raw}' for '--{name}'")))
}

/// Resolves an ensemble name; the spiky law derives its parameters from
/// the (n, rows) it is asked to generate.
fn make_spec(
    name: &str,
    dim: usize,
    rows: usize,
) -> CliResult<(EnsembleSpec, Option<SpikyDerivation>)> {
    match name {
        "gaussian" => Ok((EnsembleSpec::Gaussian, None)),
        "rademacher" => Ok((EnsembleSpec::Rademacher, None)),
        "symexp" => Ok((EnsembleSpec::SymExp, None)),
        "spiky" => {
            let derivation = derive_spiky_params(dim, rows, 2.0)?;
            Ok((
                EnsembleSpec::Spiky(derivation.params.clone()),
                Some(derivation),
            ))
        }
        other => Err(CliError::Usage(format!(
            "unknown ensemble '{other}' (gaussian | rademacher | symexp | spiky)"
        ))),
    }
}

fn dispatch(args: &[String]) -> CliResult<()> {
    let (command, rest) = match args.split_first() {
        Some((c, rest)) => (c.as_str(), rest),
        None => return Err(CliError::Usage("no command given".into())),
    };
    match command {
        "gen" => cmd_gen(rest),
        "phase" => cmd_phase(rest, RecoveryKind::BasisPursuit),
        "l0-phase" => cmd_phase(rest, RecoveryKind::L0),
        "counterexample" => cmd_counterexample(rest),
        "conditions" => cmd_conditions(rest),
        "noisy-lasso" => cmd_noisy_lasso(rest),
        "moments" => cmd_moments(rest),
        "help" | "--help" | "-h" => {
            emit(None, USAGE)?;
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown command '{other}'"))),
    }
}

#[derive(Serialize)]
struct Envelope<C: Serialize, R: Serialize> {
    command: &'static str,
    config: C,
    results: R,
}

fn emit_json<C: Serialize, R: Serialize>(
    command: &'static str,
    config: C,
    results: R,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let envelope = Envelope {
        command,
        config,
        results,
    };
    let mut body = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Runtime(Error::Io(format!("json: {e}"))))?;
    body.push('\n');
    emit(out.as_deref(), &body)?;
    Ok(())
}

// ---------------------------------------------------------------- gen --

#[derive(Serialize)]
struct GenConfig {
    ensemble: String,
    n: usize,
    rows: usize,
    seed: u64,
    spec: EnsembleSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivation: Option<SpikyDerivation>,
}

fn cmd_gen(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &["ensemble", "n", "N", "seed", "out", "format"])?;
    let dim = flags.usize_req("n")?;
    let rows = flags.usize_req("N")?;
    let seed = flags.u64_or("seed", 0)?;
    let (spec, derivation) = make_spec(flags.required("ensemble")?, dim, rows)?;
    let format = flags.format_or("csv")?;
    let stream = derive_stream(seed, 0);
    let (gamma, _) = generate_matrix(&spec, rows, dim, &stream, false);
    let out = flags.out_path();
    if format == "csv" {
        let mut body = String::new();
        for i in 0..gamma.rows() {
            let fields: Vec<String> = gamma.row(i).iter().map(|&v| fmt_real(v)).collect();
            body.push_str(&fields.join(","));
            body.push('\n');
        }
        emit(out.as_deref(), &body)?;
        Ok(())
    } else {
        let matrix: Vec<Vec<f64>> = (0..gamma.rows()).map(|i| gamma.row(i).to_vec()).collect();
        emit_json(
            "gen",
            GenConfig {
                ensemble: spec.name().into(),
                n: dim,
                rows,
                seed,
                spec,
                derivation,
            },
            matrix,
            out,
        )
    }
}

// -------------------------------------------------------------- phase --

#[derive(Serialize)]
struct PhaseRow {
    rows: usize,
    sparsity: usize,
    successes: usize,
    rate: f64,
}

#[derive(Serialize)]
struct PhaseJsonConfig {
    ensemble: String,
    recovery: RecoveryKind,
    n: usize,
    rows_list: Vec<usize>,
    sparsity_list: Vec<usize>,
    trials: usize,
    seed: u64,
    specs: Vec<EnsembleSpec>,
}

fn cmd_phase(args: &[String], recovery: RecoveryKind) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "ensemble", "n", "N", "N-list", "s", "s-list", "trials", "seed", "out", "format",
        ],
    )?;
    let dim = flags.usize_req("n")?;
    let rows_list: Vec<usize> = match flags.optional("N-list") {
        Some(_) => flags.list_req("N-list")?,
        None => vec![flags.usize_req("N")?],
    };
    let sparsity_list: Vec<usize> = match flags.optional("s-list") {
        Some(_) => flags.list_req("s-list")?,
        None => vec![flags.usize_req("s")?],
    };
    let trials = flags.usize_req("trials")?;
    let seed = flags.u64_or("seed", 0)?;
    let ensemble_name = flags.required("ensemble")?.to_string();
    let format = flags.format_or("csv")?;
    let out = flags.out_path();

    // The spiky law depends on (n, N), so each measurement count gets its
    // own resolved spec; the cell order follows the flag order.
    let mut cells: Vec<PhaseCell> = Vec::new();
    let mut specs: Vec<EnsembleSpec> = Vec::new();
    for &rows in &rows_list {
        let (spec, _) = make_spec(&ensemble_name, dim, rows)?;
        specs.push(spec.clone());
        let table = phase_diagram(&PhaseConfig {
            spec,
            recovery,
            dim,
            rows_list: vec![rows],
            sparsity_list: sparsity_list.clone(),
            trials,
            master_seed: seed,
        })?;
        cells.extend(table.cells);
    }

    if format == "csv" {
        let mut csv = Csv::new(&[
            "ensemble",
            "n",
            "N",
            "s",
            "trials",
            "successes",
            "rate",
            "seed",
        ]);
        for c in &cells {
            csv.row(&[
                ensemble_name.clone(),
                int_field(dim),
                int_field(c.rows),
                int_field(c.sparsity),
                int_field(trials),
                int_field(c.successes),
                fmt_real(c.rate(trials)),
                u64_field(seed),
            ]);
        }
        emit(out.as_deref(), &csv.finish())?;
        Ok(())
    } else {
        let rows: Vec<PhaseRow> = cells
            .iter()
            .map(|c| PhaseRow {
                rows: c.rows,
                sparsity: c.sparsity,
                successes: c.successes,
                rate: c.rate(trials),
            })
            .collect();
        emit_json(
            match recovery {
                RecoveryKind::BasisPursuit => "phase",
                RecoveryKind::L0 => "l0-phase",
            },
            PhaseJsonConfig {
                ensemble: ensemble_name,
                recovery,
                n: dim,
                rows_list,
                sparsity_list,
                trials,
                seed,
                specs,
            },
            rows,
            out,
        )
    }
}

// ----------------------------------------------------- counterexample --

#[derive(Serialize)]
struct CounterexampleJsonConfig {
    n: usize,
    rows: usize,
    trials: usize,
    seed: u64,
    slack: f64,
}

fn cmd_counterexample(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(args, &["n", "N", "trials", "seed", "out", "format"])?;
    let dim = flags.usize_req("n")?;
    let rows = flags.usize_req("N")?;
    let trials = flags.usize_req("trials")?;
    let seed = flags.u64_or("seed", 0)?;
    let format = flags.format_or("json")?;
    let out = flags.out_path();
    let outcome = counterexample_experiment(&CounterexampleConfig {
        dim,
        rows,
        trials,
        master_seed: seed,
        slack: 2.0,
        params_override: None,
    })?;
    if format == "csv" {
        let mut csv = Csv::new(&[
            "trial",
            "seed",
            "competitor",
            "failure",
            "col1_norm",
            "col1_norm_ok",
            "perturb_rows_missing",
            "perturb_holds",
            "kernel_cone",
            "col1_vertex",
        ]);
        for t in &outcome.per_trial {
            csv.row(&[
                int_field(t.trial),
                u64_field(t.seed),
                fmt_real(t.competitor),
                bool_field(t.failure),
                fmt_real(t.col1_norm),
                bool_field(t.col1_norm_ok),
                int_field(t.perturb_rows_missing),
                bool_field(t.perturb_holds),
                bool_field(t.kernel_cone),
                bool_field(t.col1_vertex),
            ]);
        }
        emit(out.as_deref(), &csv.finish())?;
        Ok(())
    } else {
        emit_json(
            "counterexample",
            CounterexampleJsonConfig {
                n: dim,
                rows,
                trials,
                seed,
                slack: 2.0,
            },
            outcome,
            out,
        )
    }
}

// --------------------------------------------------------- conditions --

#[derive(Serialize)]
struct ConditionsJsonConfig {
    ensemble: String,
    n: usize,
    rows: usize,
    s: usize,
    u: f64,
    budget_l: f64,
    c0: f64,
    directions: usize,
    samples: usize,
    seed: u64,
    spec: EnsembleSpec,
}

fn cmd_conditions(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "ensemble",
            "n",
            "N",
            "s",
            "u",
            "L",
            "c0",
            "directions",
            "seed",
            "out",
            "format",
        ],
    )?;
    let dim = flags.usize_req("n")?;
    let rows = flags.usize_req("N")?;
    let s = flags.usize_req("s")?;
    let u = flags.f64_or("u", 0.5)?;
    let budget_l = flags.f64_or("L", 3.0)?;
    let c0 = flags.f64_or("c0", 3.0)?;
    let directions = flags.usize_or("directions", 200)?;
    let seed = flags.u64_or("seed", 0)?;
    let format = flags.format_or("json")?;
    let out = flags.out_path();
    let (spec, _) = make_spec(flags.required("ensemble")?, dim, rows)?;
    let stream = derive_stream(seed, 0);
    let (gamma, _) = generate_matrix(&spec, rows, dim, &stream, false);
    let query = ConditionQuery {
        s,
        u,
        budget_l,
        c0,
        m: s,
        directions,
        samples: 1000,
        fw_iters: 20_000,
        restarts: 30,
    };
    let mut rng = derive_stream(seed, 1);
    let report = condition_report(&gamma, &spec, &query, &mut rng)?;
    if format == "csv" {
        let mut csv = Csv::new(&["key", "value"]);
        let mut kv = |k: &str, v: String| csv.row(&[k.to_string(), v]);
        kv("order", int_field(report.order));
        kv(
            "restricted_sigma_min",
            fmt_real(report.restricted_sigma_min),
        );
        kv(
            "restricted_sigma_max",
            fmt_real(report.restricted_sigma_max),
        );
        kv("rip_delta", fmt_real(report.rip_delta));
        kv("nsp_holds", bool_field(report.nsp.holds));
        kv("nsp_worst_ratio", fmt_real(report.nsp.worst_ratio));
        kv("nsp_margin", fmt_real(report.nsp_margin));
        kv(
            "certificate_lower_isometry",
            fmt_real(report.certificate.lower_isometry),
        );
        kv(
            "certificate_column_bound",
            fmt_real(report.certificate.column_bound),
        );
        kv(
            "certificate_guaranteed_order",
            int_field(report.certificate.guaranteed_order),
        );
        kv("beta_hat", fmt_real(report.beta.beta_hat));
        kv("beta_exact", bool_field(report.beta.exact));
        kv("phi_upper", fmt_real(report.phi.phi_upper));
        kv("phi_gap", fmt_real(report.phi.gap));
        kv("phi_exact", bool_field(report.phi.exact));
        kv("kappa_upper", fmt_real(report.kappa.kappa_upper));
        kv("kappa_exact", bool_field(report.kappa.exact));
        kv("num_vertices", int_field(report.vertices.num_vertices));
        kv(
            "non_vertex_columns",
            int_field(report.vertices.non_vertex_columns.len()),
        );
        kv("neighbourly", bool_field(report.neighbourly.neighbourly));
        emit(out.as_deref(), &csv.finish())?;
        Ok(())
    } else {
        emit_json(
            "conditions",
            ConditionsJsonConfig {
                ensemble: spec.name().into(),
                n: dim,
                rows,
                s,
                u,
                budget_l,
                c0,
                directions,
                samples: 1000,
                seed,
                spec,
            },
            report,
            out,
        )
    }
}

// -------------------------------------------------------- noisy-lasso --

#[derive(Serialize)]
struct NoisyJsonConfig {
    ensemble: String,
    n: usize,
    rows: usize,
    s: usize,
    sigma: f64,
    t: f64,
    lambda: f64,
    trials: usize,
    seed: u64,
    spec: EnsembleSpec,
}

fn cmd_noisy_lasso(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "ensemble", "n", "N", "s", "sigma", "t", "lambda", "trials", "seed", "out", "format",
        ],
    )?;
    let dim = flags.usize_req("n")?;
    let rows = flags.usize_req("N")?;
    let s = flags.usize_req("s")?;
    let sigma = flags.f64_req("sigma")?;
    let t = flags.f64_req("t")?;
    let trials = flags.usize_req("trials")?;
    let seed = flags.u64_or("seed", 0)?;
    let format = flags.format_or("json")?;
    let out = flags.out_path();
    let (spec, _) = make_spec(flags.required("ensemble")?, dim, rows)?;
    let lambda_override = match flags.optional("lambda") {
        Some(raw) => Some(parse_num::<f64>(raw, "lambda")?),
        None => None,
    };
    let outcome = noisy_lasso_experiment(&NoisyLassoConfig {
        spec: spec.clone(),
        dim,
        rows,
        sparsity: s,
        model: NoisyModel::new(sigma, t)?,
        trials,
        master_seed: seed,
        fixed_gamma: None,
        lambda_override,
    })?;
    if format == "csv" {
        let mut csv = Csv::new(&[
            "trial",
            "lambda",
            "phi",
            "prediction_error_sq",
            "prediction_bound",
            "prediction_ok",
            "l1_error",
            "l1_bound",
            "l1_ok",
        ]);
        for row in &outcome.per_trial {
            csv.row(&[
                int_field(row.trial),
                fmt_real(row.lambda),
                fmt_real(row.phi),
                fmt_real(row.prediction_error_sq),
                fmt_real(row.prediction_bound),
                bool_field(row.prediction_ok),
                fmt_real(row.l1_error),
                fmt_real(row.l1_bound),
                bool_field(row.l1_ok),
            ]);
        }
        emit(out.as_deref(), &csv.finish())?;
        Ok(())
    } else {
        let lambda = outcome.lambda;
        emit_json(
            "noisy-lasso",
            NoisyJsonConfig {
                ensemble: spec.name().into(),
                n: dim,
                rows,
                s,
                sigma,
                t,
                lambda,
                trials,
                seed,
                spec,
            },
            outcome,
            out,
        )
    }
}

// ------------------------------------------------------------ moments --

#[derive(Serialize)]
struct MomentsJsonConfig {
    ensemble: String,
    p_list: Vec<f64>,
    rows: usize,
    mc_samples: usize,
    seed: u64,
    spec: EnsembleSpec,
}

fn cmd_moments(args: &[String]) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &["ensemble", "p-list", "N", "trials", "seed", "out", "format"],
    )?;
    let p_list: Vec<f64> = flags.list_req("p-list")?;
    let rows = flags.usize_req("N")?;
    let mc_samples = flags.usize_req("trials")?;
    let seed = flags.u64_or("seed", 0)?;
    let format = flags.format_or("csv")?;
    let out = flags.out_path();
    let (spec, _) = make_spec(flags.required("ensemble")?, rows.max(16), rows)?;
    let table = moment_growth_experiment(&MomentConfig {
        spec: spec.clone(),
        law: MomentLaw::Coordinate,
        p_list: p_list.clone(),
        rows,
        mc_samples,
        master_seed: seed,
    })?;
    if format == "csv" {
        let mut csv = Csv::new(&["p", "lhs", "lhs_over_sqrt_p", "gaussian_ref"]);
        for row in &table {
            csv.row(&[
                fmt_real(row.p),
                fmt_real(row.lhs),
                fmt_real(row.lhs_over_sqrt_p),
                fmt_real(row.gaussian_ref),
            ]);
        }
        emit(out.as_deref(), &csv.finish())?;
        Ok(())
    } else {
        emit_json(
            "moments",
            MomentsJsonConfig {
                ensemble: spec.name().into(),
                p_list,
                rows,
                mc_samples,
                seed,
                spec,
            },
            table,
            out,
        )
    }
}
