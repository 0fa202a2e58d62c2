//! End-to-end checks of the command-line surface: schemas, provenance,
//! and exit codes, driven through `srl::cli::run` exactly as the binary
//! does.

use std::path::PathBuf;

fn run(args: &[&str]) -> i32 {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    srl::cli::run(&owned)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("srl-it-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn phase_grid_emits_one_row_per_cell() {
    let dir = temp_dir("phase");
    let out = dir.join("phase.csv");
    let code = run(&[
        "phase",
        "--ensemble",
        "gaussian",
        "--n",
        "64",
        "--N-list",
        "8,16,24,32",
        "--s-list",
        "1,2,3",
        "--trials",
        "50",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "ensemble,n,N,s,trials,successes,rate,seed");
    assert_eq!(lines.len(), 1 + 12, "4 measurement counts x 3 sparsities");
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[0], "gaussian");
        assert_eq!(fields[1], "64");
        assert_eq!(fields[7], "7");
        let rate: f64 = fields[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn counterexample_json_reports_failure_freq_and_derived_params() {
    let dir = temp_dir("cex");
    let out = dir.join("cex.json");
    let code = run(&[
        "counterexample",
        "--n",
        "10000",
        "--N",
        "4",
        "--trials",
        "100",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["command"], "counterexample");
    // Full resolved configuration embedded for provenance.
    assert_eq!(v["config"]["n"], 10000);
    assert_eq!(v["config"]["seed"], 1);
    let failure = v["results"]["failure_freq"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&failure));
    let delta = v["results"]["params"]["delta"].as_f64().unwrap();
    assert!((delta - 1.38629e-4).abs() < 1e-8);
    assert!(v["results"]["params"]["spike"].as_f64().unwrap() > 8.0);
    assert_eq!(v["results"]["diagnostics"].as_array().unwrap().len(), 4);
    assert_eq!(v["results"]["per_trial"].as_array().unwrap().len(), 100);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn conditions_csv_lists_every_quantity() {
    let dir = temp_dir("cond");
    let out = dir.join("cond.csv");
    let code = run(&[
        "conditions",
        "--ensemble",
        "gaussian",
        "--n",
        "8",
        "--N",
        "16",
        "--s",
        "2",
        "--u",
        "0.5",
        "--seed",
        "4",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = std::fs::read_to_string(&out).unwrap();
    for key in [
        "restricted_sigma_min",
        "rip_delta",
        "nsp_holds",
        "certificate_guaranteed_order",
        "beta_hat",
        "phi_upper",
        "kappa_upper",
        "num_vertices",
        "neighbourly",
    ] {
        assert!(
            body.lines().any(|l| l.starts_with(&format!("{key},"))),
            "missing {key}"
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gen_csv_matrix_has_requested_shape() {
    let dir = temp_dir("gen");
    let out = dir.join("m.csv");
    let code = run(&[
        "gen",
        "--ensemble",
        "rademacher",
        "--n",
        "6",
        "--N",
        "3",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = body.lines().collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 6);
        let scale = 1.0 / 3f64.sqrt();
        assert!(vals.iter().all(|v| (v.abs() - scale).abs() < 1e-15));
    }
    std::fs::remove_dir_all(&dir).ok();
}

// Worker count must never leak into results. Run the actual binary with
// different SRL_THREADS settings (a process-wide knob, so it needs
// subprocesses) and compare bytes.
#[test]
fn srl_threads_changes_nothing() {
    let dir = temp_dir("threads");
    let mut outputs = Vec::new();
    for workers in ["1", "7"] {
        let out = dir.join(format!("w{workers}.csv"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_srl"))
            .args([
                "phase",
                "--ensemble",
                "symexp",
                "--n",
                "24",
                "--N-list",
                "6,12",
                "--s-list",
                "1,2",
                "--trials",
                "16",
                "--seed",
                "13",
                "--out",
                out.to_str().unwrap(),
            ])
            .env("SRL_THREADS", workers)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "results depended on the worker count");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn moments_stdout_csv_schema() {
    // No --out: the table goes to stdout; here only the exit code and the
    // p precondition are visible.
    assert_eq!(
        run(&[
            "moments",
            "--ensemble",
            "gaussian",
            "--p-list",
            "2,4",
            "--N",
            "16",
            "--trials",
            "2000",
            "--seed",
            "1"
        ]),
        0
    );
    // Precondition violation: N below p^max(2a-1,1) for symexp at p=32.
    assert_eq!(
        run(&[
            "moments",
            "--ensemble",
            "symexp",
            "--p-list",
            "32",
            "--N",
            "8",
            "--trials",
            "2000"
        ]),
        2
    );
}
