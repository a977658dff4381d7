use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain has no occupied cells")]
    EmptyDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lattice spacing mismatch: {0} vs {1}")]
    SpacingMismatch(f64, f64),

    #[error("domains do not share a lattice (origin offset is not a whole number of cells)")]
    LatticeMismatch,

    #[error("inclusion violated: first domain is not contained in the second")]
    NotSubset,

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("requested {requested} eigenvalues but the domain has only {available} cells")]
    TooManyEigenvalues { requested: usize, available: usize },

    #[error("no eigenvalue ratio bound M_{0} configured")]
    MissingRatioBound(usize),

    #[error("strip half-width {r0} is below 4h = {min}; use a finer grid")]
    GridTooCoarse { r0: f64, min: f64 },

    #[error("malformed bitmap: {0}")]
    Bitmap(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
