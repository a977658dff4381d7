use serde::{Deserialize, Serialize};

use super::eigen::{lowest_eigenvalues, EigenOptions};
use super::operator::{DofMap, Laplacian};
use crate::domain::GridDomain;
use crate::error::{Error, Result};

/// Lowest Dirichlet eigenvalues of a domain, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Largest relative eigen-residual of the computed pairs; some exact
    /// eigenvalue lies within this relative distance of each entry.
    pub rel_tol: f64,
}

impl Spectrum {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `lambda_i`, counting from 1.
    pub fn lambda(&self, i: usize) -> f64 {
        self.eigenvalues[i - 1]
    }

    /// Spectrum of the domain dilated by `t`.
    pub fn rescaled(&self, t: f64) -> Spectrum {
        let t2 = t * t;
        Spectrum {
            eigenvalues: self.eigenvalues.iter().map(|l| l / t2).collect(),
            rel_tol: self.rel_tol,
        }
    }
}

pub fn eigenvalues(d: &GridDomain, k: usize, opts: &EigenOptions) -> Result<Spectrum> {
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if k > d.cell_count() {
        return Err(Error::TooManyEigenvalues {
            requested: k,
            available: d.cell_count(),
        });
    }
    let a = Laplacian::new(&DofMap::new(d));
    let out = lowest_eigenvalues(&a, k, opts)?;
    let h2 = d.h() * d.h();
    Ok(Spectrum {
        eigenvalues: out.values.iter().map(|mu| mu / h2).collect(),
        rel_tol: out.rel_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let h = 0.25;
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], [(0, 0)]).unwrap();
        let s = eigenvalues(&d, 1, &EigenOptions::default()).unwrap();
        assert!((s.lambda(1) - 4.0 / (h * h)).abs() < 1e-12);
        assert!(eigenvalues(&d, 2, &EigenOptions::default()).is_err());
    }

    #[test]
    fn json_shape() {
        let s = Spectrum {
            eigenvalues: vec![1.0, 2.0],
            rel_tol: 1e-9,
        };
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["eigenvalues"][1], 2.0);
        assert_eq!(v["rel_tol"], 1e-9);
    }
}
