//! Every recovery condition evaluated on one matrix: restricted singular
//! extremes, null space property, small-ball constant, compatibility and
//! restricted eigenvalue bounds, the sparsity certificate, and the vertex
//! and neighbourliness census of the column polytope.
//!
//! ```bash
//! cargo run --release --example matrix_conditions
//! ```

use srl::conditions::{condition_report, ConditionQuery};
use srl::ensembles::{generate_matrix, EnsembleSpec};
use srl::rng::derive_stream;

fn main() {
    let (rows, dim) = (20, 10);
    let spec = EnsembleSpec::Gaussian;
    let stream = derive_stream(2, 0);
    let (gamma, _) = generate_matrix(&spec, rows, dim, &stream, false);

    let query = ConditionQuery {
        s: 2,
        u: 0.5,
        budget_l: 3.0,
        c0: 3.0,
        m: 2,
        directions: 200,
        samples: 1000,
        fw_iters: 20_000,
        restarts: 30,
    };
    let mut rng = derive_stream(2, 1);
    let report = condition_report(&gamma, &spec, &query, &mut rng).expect("within guards");

    println!(
        "gaussian matrix, {rows} x {dim}, order s = {}",
        report.order
    );
    println!(
        "restricted sigma:  [{:.4}, {:.4}]",
        report.restricted_sigma_min, report.restricted_sigma_max
    );
    println!("isometry defect:   {:.4}", report.rip_delta);
    println!(
        "null space prop:   holds = {} (worst ratio {:.4}, margin {:.4})",
        report.nsp.holds, report.nsp.worst_ratio, report.nsp_margin
    );
    println!(
        "certificate:       lower isometry {:.4}, column bound {:.4} -> guaranteed order {}",
        report.certificate.lower_isometry,
        report.certificate.column_bound,
        report.certificate.guaranteed_order
    );
    println!(
        "small-ball beta:   {:.4} at u = {} ({} directions, inexact)",
        report.beta.beta_hat, query.u, report.beta.directions
    );
    println!(
        "compatibility:     phi(L={}, S={:?}) <= {:.4} (gap {:.1e})",
        query.budget_l, report.phi_support, report.phi.phi_upper, report.phi.gap
    );
    println!(
        "restricted eigen:  kappa({}, {}, {}) <= {:.4}",
        query.s, query.m, query.c0, report.kappa.kappa_upper
    );
    println!(
        "column polytope:   {} vertices ({} columns lost), {}-neighbourly = {}",
        report.vertices.num_vertices,
        report.vertices.non_vertex_columns.len(),
        report.order,
        report.neighbourly.neighbourly
    );
}
