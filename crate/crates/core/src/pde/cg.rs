use super::operator::Laplacian;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `||b - A x|| / ||b||` at exit.
    pub relative_residual: f64,
}

/// Conjugate gradients for `A x = b`, starting from the contents of `x`.
pub fn conjugate_gradient(
    a: &Laplacian,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ap = vec![0.0; n];
    a.apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, ax)| b - ax).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rr.sqrt() / bnorm,
            });
        }
        a.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    // recompute the true residual; the recurrence drifts
    a.apply(x, &mut ap);
    let true_res = b
        .iter()
        .zip(&ap)
        .map(|(b, ax)| (b - ax) * (b - ax))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    if true_res <= tol {
        return Ok(CgOutcome {
            iterations: max_iter,
            relative_residual: true_res,
        });
    }
    Err(Error::NotConverged {
        solver: "conjugate gradient",
        iterations: max_iter,
        residual: true_res,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators keep the loop vectorizable and the sum order fixed
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridDomain;
    use crate::pde::operator::DofMap;

    #[test]
    fn solves_small_system() {
        let d = GridDomain::from_lattice_cells(1.0, [0.0, 0.0], (0..5).map(|a| (a, 0))).unwrap();
        let a = Laplacian::new(&DofMap::new(&d));
        let b = vec![1.0; 5];
        let mut x = vec![0.0; 5];
        let out = conjugate_gradient(&a, &b, &mut x, 1e-12, 100).unwrap();
        assert!(out.relative_residual <= 1e-12);
        let mut ax = vec![0.0; 5];
        a.apply(&x, &mut ax);
        for v in ax {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reports_nonconvergence() {
        let d = GridDomain::from_lattice_cells(1.0, [0.0, 0.0], (0..50).map(|a| (a, 0))).unwrap();
        let a = Laplacian::new(&DofMap::new(&d));
        let mut x = vec![0.0; 50];
        let err = conjugate_gradient(&a, &vec![1.0; 50], &mut x, 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }
}
