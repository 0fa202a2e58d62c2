//! Heavy tails defeat l1 recovery: with the spiky coordinate law (a
//! Rademacher sign carrying a rare spike), the column body of a typical
//! matrix swallows column 1, so basis pursuit cannot single out e1.
//!
//! ```bash
//! cargo run --release --example spiky_counterexample
//! ```

use srl::experiments::{counterexample_experiment, CounterexampleConfig};

fn main() {
    let config = CounterexampleConfig {
        dim: 4000,
        rows: 4,
        trials: 25,
        master_seed: 3,
        slack: 2.0,
        params_override: None,
    };
    let out = counterexample_experiment(&config).expect("parameter derivation succeeds");

    println!(
        "spiky law at n = {}, N = {}: delta = {:.3e}, spike height = {:.3}, p = {:.3}",
        out.params.n, out.params.rows, out.params.delta, out.params.spike, out.params.p
    );
    println!("\nparameter window diagnostics:");
    for d in &out.diagnostics {
        println!(
            "  {:<42} value {:>12.5}  threshold {:>12.5}  {}",
            d.name,
            d.value,
            d.threshold,
            if d.satisfied { "ok" } else { "out of window" }
        );
    }
    println!("\nover {} trials:", out.trials);
    println!(
        "  reconstruction failure frequency: {:.2}",
        out.failure_freq
    );
    println!(
        "  dedicated-spike rows (per row):   {:.3}",
        out.perturbation_row_freq
    );
    println!(
        "  all rows served (per trial):      {:.2}",
        out.perturbation_all_freq
    );
    println!(
        "  column-1 norm at most 1:          {:.2}",
        out.col1_norm_freq
    );

    let t = &out.per_trial[0];
    println!(
        "\nfirst trial: competitor norm {:.6} -> failure = {}",
        t.competitor, t.failure
    );
}
