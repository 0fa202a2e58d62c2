//! srl: a sparse recovery lab.
//!
//! Dense linear algebra, a deterministic simplex solver, heavy-tailed
//! measurement ensembles, recovery procedures (basis pursuit, l0 search,
//! lasso), matrix conditions (null space property, restricted isometry and
//! eigenvalue constants, compatibility, polytope geometry) and seeded
//! Monte Carlo experiment harnesses built on top of them.

pub mod cli;
pub mod conditions;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lp;
pub mod report;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
