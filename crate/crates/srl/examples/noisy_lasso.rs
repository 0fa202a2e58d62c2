//! Lasso under Gaussian noise: the regularization rule
//! `lambda = 4 sigma sqrt((t^2 + ln n)/N)` and the compatibility-constant
//! error bounds it buys, checked trial by trial.
//!
//! ```bash
//! cargo run --release --example noisy_lasso
//! ```

use srl::ensembles::EnsembleSpec;
use srl::experiments::{noisy_lasso_experiment, NoisyLassoConfig, NoisyModel};

fn main() {
    let config = NoisyLassoConfig {
        spec: EnsembleSpec::Gaussian,
        dim: 32,
        rows: 24,
        sparsity: 2,
        model: NoisyModel::new(0.1, 2.0).unwrap(),
        trials: 30,
        master_seed: 5,
        fixed_gamma: None,
        lambda_override: None,
    };
    let out = noisy_lasso_experiment(&config).expect("desk scale");

    println!(
        "n = {}, N = {}, s = {}, sigma = {}, t = {} -> lambda = {:.4}",
        config.dim, config.rows, config.sparsity, config.model.sigma, config.model.t, out.lambda
    );
    println!("\ntrial  phi      prediction (err^2 vs bound)   l1 (err vs bound)");
    for t in out.per_trial.iter().take(10) {
        println!(
            "{:>4}   {:.3}    {:>9.5} vs {:>8.4} {}      {:>7.4} vs {:>8.4} {}",
            t.trial,
            t.phi,
            t.prediction_error_sq,
            t.prediction_bound,
            if t.prediction_ok { "ok" } else { "VIOLATED" },
            t.l1_error,
            t.l1_bound,
            if t.l1_ok { "ok" } else { "VIOLATED" },
        );
    }
    println!("  ... ({} trials total)", out.trials);
    println!(
        "\nviolation frequencies: prediction {:.2}, l1 {:.2}; probability budget {:.3}",
        out.prediction_violation_freq, out.l1_violation_freq, out.violation_budget
    );
}
