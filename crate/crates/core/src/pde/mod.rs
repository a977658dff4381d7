//! Discrete Dirichlet problems on a [`GridDomain`](crate::domain::GridDomain):
//! torsion function and lowest eigenvalues of the five-point Laplacian.

mod cg;
mod cholesky;
mod eigen;
mod operator;
mod spectrum;
mod torsion;

pub use cg::{conjugate_gradient, CgOutcome};
pub use cholesky::EnvelopeCholesky;
pub use eigen::{lowest_eigenvalues, EigenOptions, EigenOutcome};
pub use operator::{DofMap, Laplacian};
pub use spectrum::{eigenvalues, Spectrum};
pub use torsion::{
    gamma_distance, gamma_distance_fields, read_torsion, solve_torsion, strip_max, torsion_energy,
    write_torsion, TorsionField, TorsionHeader, TorsionOptions,
};
