//! Moment growth of normalized sums: averaging N independent copies of a
//! (possibly heavy-tailed) coordinate restores subgaussian L_p norms up
//! to the law's moment horizon.
//!
//! ```bash
//! cargo run --release --example moment_growth
//! ```

use srl::ensembles::{derive_spiky_params, EnsembleSpec};
use srl::experiments::{moment_growth_experiment, MomentConfig, MomentLaw};

fn main() {
    let p_list = vec![2.0, 4.0, 6.0, 8.0];
    let laws = [
        EnsembleSpec::Gaussian,
        EnsembleSpec::SymExp,
        EnsembleSpec::Spiky(derive_spiky_params(10_000, 4, 2.0).unwrap().params),
    ];
    for spec in laws {
        let table = moment_growth_experiment(&MomentConfig {
            spec: spec.clone(),
            law: MomentLaw::Coordinate,
            p_list: p_list.clone(),
            rows: 64,
            mc_samples: 50_000,
            master_seed: 9,
        })
        .expect("precondition satisfied");
        println!("{} coordinates, N = 64, 5*10^4 sums:", spec.name());
        println!("   p     L_p(sum)   L_p/sqrt(p)   gaussian ref");
        for row in table {
            println!(
                "  {:>4}   {:>8.4}   {:>10.4}   {:>10.4}",
                row.p, row.lhs, row.lhs_over_sqrt_p, row.gaussian_ref
            );
        }
        println!();
    }
}
