//! l0 minimization does not care about moments: the same spiky law that
//! breaks basis pursuit still admits unique sparsest-solution recovery at
//! a near-optimal number of measurements.
//!
//! ```bash
//! cargo run --release --example l0_recovery
//! ```

use srl::ensembles::{EnsembleSpec, SpikyParams};
use srl::experiments::{l0_experiment, phase_diagram, PhaseConfig, RecoveryKind};

fn main() {
    let (dim, rows, sparsity, trials) = (20, 16, 2, 50);
    let delta = (rows as f64).ln() / dim as f64;
    let params = SpikyParams::with_delta(dim, rows, delta, 4.0).expect("valid spiky parameters");
    let spec = EnsembleSpec::Spiky(params);

    let l0_rate = l0_experiment(&spec, dim, sparsity, rows, trials, 11).expect("within guards");
    println!("spiky law, n = {dim}, N = {rows}, s = {sparsity}, {trials} trials");
    println!("  l0 unique-recovery rate: {l0_rate:.2}");

    // The convex relaxation on the same draws. At this aspect ratio both
    // succeed; the l1 failures need the wide flat regime demonstrated in
    // the spiky_counterexample example.
    let bp = phase_diagram(&PhaseConfig {
        spec,
        recovery: RecoveryKind::BasisPursuit,
        dim,
        rows_list: vec![rows],
        sparsity_list: vec![sparsity],
        trials,
        master_seed: 11,
    })
    .expect("desk scale");
    println!("  basis pursuit rate:      {:.2}", bp.cells[0].rate(trials));

    // With absolutely continuous entries, 2s measurements already force
    // uniqueness of the sparsest solution.
    let gauss = l0_experiment(
        &EnsembleSpec::Gaussian,
        8,
        sparsity,
        2 * sparsity,
        trials,
        12,
    )
    .expect("within guards");
    println!(
        "\ngaussian law, n = 8, N = 2s = {}: l0 rate {gauss:.2}",
        2 * sparsity
    );
}
