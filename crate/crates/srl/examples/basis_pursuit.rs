//! Recover a sparse signal from a few random linear measurements.
//!
//! ```bash
//! cargo run --release --example basis_pursuit
//! ```

use srl::ensembles::{generate_matrix, EnsembleSpec};
use srl::experiments::sparse_unit_signal;
use srl::rng::derive_stream;
use srl::solvers::basis_pursuit;

fn main() {
    let (dim, rows, sparsity) = (40, 20, 3);
    let stream = derive_stream(7, 0);
    let (gamma, _) = generate_matrix(&EnsembleSpec::Gaussian, rows, dim, &stream, false);

    let mut signal_rng = derive_stream(7, 1);
    let x0 = sparse_unit_signal(dim, sparsity, &mut signal_rng);
    let y = gamma.mul_vec(&x0);

    let result = basis_pursuit(&gamma, &y, Some(&x0)).expect("measurements are consistent");
    println!("{dim}-dimensional signal, {sparsity} nonzeros, {rows} measurements");
    println!("l1 objective:     {:.6}", result.objective);
    println!(
        "signal l1 norm:   {:.6}",
        x0.iter().map(|v| v.abs()).sum::<f64>()
    );
    println!("linf error:       {:.2e}", result.linf_error.unwrap());
    println!("recovered:        {}", result.recovered.unwrap());

    let support: Vec<usize> = (0..dim).filter(|&j| x0[j] != 0.0).collect();
    println!("\n  j     x0[j]        xhat[j]");
    for j in support {
        println!("{j:>3}  {:>9.5}  {:>13.9}", x0[j], result.xhat[j]);
    }
}
