//! Exact combinatorics of unramified local Shimura data for classical groups.
//!
//! The library computes Kottwitz sets `B(G, μ)`, the Rapoport–Zink dimension
//! formula, Ekedahl–Oort index sets with their orthogonal dictionaries, and
//! checks them against brute-force lattice and finite-group oracles.

pub mod cli;
pub mod eo_strata;
pub mod ff_slopes;
pub mod kottwitz;
pub mod lattice_oracle;
pub mod linalg;
pub mod root_datum;

use linalg::Q;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("defect table incomplete: {0}")]
    DefectTable(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

/// Render a rational as `"num/den"`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn fmt_qs(xs: &[Q]) -> Vec<String> {
    xs.iter().map(fmt_q).collect()
}
