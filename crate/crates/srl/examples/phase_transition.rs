//! Exact-recovery rates over a (measurements, sparsity) grid: the sharp
//! jump from never-recovers to always-recovers.
//!
//! ```bash
//! cargo run --release --example phase_transition
//! ```

use srl::ensembles::EnsembleSpec;
use srl::experiments::{phase_diagram, PhaseConfig, RecoveryKind};

fn main() {
    let rows_list = vec![4, 8, 12, 16, 20, 24, 28, 32];
    let sparsity_list = vec![1, 2, 3, 4];
    let config = PhaseConfig {
        spec: EnsembleSpec::Gaussian,
        recovery: RecoveryKind::BasisPursuit,
        dim: 48,
        rows_list: rows_list.clone(),
        sparsity_list: sparsity_list.clone(),
        trials: 40,
        master_seed: 1,
    };
    let table = phase_diagram(&config).expect("desk-scale grid");

    println!(
        "basis pursuit recovery rate, n = {}, {} trials per cell",
        config.dim, config.trials
    );
    print!("  N \\ s |");
    for &s in &sparsity_list {
        print!("  {s:>4}");
    }
    println!();
    println!("--------+{}", "------".repeat(sparsity_list.len()));
    for &rows in &rows_list {
        print!("  {rows:>5} |");
        for &s in &sparsity_list {
            print!("  {:>4.2}", table.rate_at(rows, s).unwrap());
        }
        println!();
    }
}
