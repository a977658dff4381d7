//! Lowest eigenvalues of the dimensionless Laplacian.
//!
//! Small systems go through a dense symmetric eigensolver. Larger ones use
//! inverse subspace iteration: a block of vectors is repeatedly multiplied by
//! `A^{-1}` through an envelope Cholesky factor, followed by a Rayleigh-Ritz
//! projection. Leading Ritz pairs whose residual meets the tolerance are
//! locked and no longer multiplied.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cholesky::EnvelopeCholesky;
use super::operator::Laplacian;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Each returned pair satisfies `||A x - theta x|| <= tol * theta`.
    pub tol: f64,
    /// Seed of the random start block.
    pub seed: u64,
    pub max_iter: usize,
    /// Systems with at most this many unknowns are solved densely.
    pub dense_threshold: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            seed: 0x5eed,
            max_iter: 2000,
            dense_threshold: 400,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenOutcome {
    /// Ascending eigenvalues of `A`.
    pub values: Vec<f64>,
    /// Largest `||A x - theta x|| / theta` over the returned pairs.
    pub rel_residual: f64,
    pub iterations: usize,
}

pub fn lowest_eigenvalues(a: &Laplacian, k: usize, opts: &EigenOptions) -> Result<EigenOutcome> {
    let n = a.len();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    if k > n {
        return Err(Error::TooManyEigenvalues {
            requested: k,
            available: n,
        });
    }
    if k == 0 {
        return Ok(EigenOutcome {
            values: Vec::new(),
            rel_residual: 0.0,
            iterations: 0,
        });
    }
    if n <= opts.dense_threshold {
        dense(a, k)
    } else {
        subspace_iteration(a, k, opts)
    }
}

fn dense(a: &Laplacian, k: usize) -> Result<EigenOutcome> {
    let m = a.to_dense();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let mut values = Vec::with_capacity(k);
    let mut worst = 0.0f64;
    for &c in &order[..k] {
        let theta = eig.eigenvalues[c];
        let x = eig.eigenvectors.column(c);
        let r = (&m * x - x * theta).norm() / x.norm();
        worst = worst.max(r / theta);
        values.push(theta);
    }
    Ok(EigenOutcome {
        values,
        rel_residual: worst,
        iterations: 1,
    })
}

fn block_size(k: usize, n: usize) -> usize {
    (2 * k + 2).max(k + 5).min(n)
}

fn subspace_iteration(a: &Laplacian, k: usize, opts: &EigenOptions) -> Result<EigenOutcome> {
    let n = a.len();
    let p = block_size(k, n);
    let chol = EnvelopeCholesky::factor(a, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    let mut locked = 0usize;
    let mut buf = vec![0.0; n * p];
    let mut ax = DMatrix::zeros(n, p);
    let mut last_res = f64::INFINITY;
    for it in 1..=opts.max_iter {
        // multiply the unlocked columns by A^{-1}
        let m = p - locked;
        for i in 0..n {
            for c in 0..m {
                buf[i * m + c] = x[(i, locked + c)];
            }
        }
        chol.solve_block(&mut buf[..n * m], m);
        for i in 0..n {
            for c in 0..m {
                x[(i, locked + c)] = buf[i * m + c];
            }
        }
        let q = x.clone().qr().q();
        let mut aq = DMatrix::zeros(n, p);
        for c in 0..p {
            let col: Vec<f64> = q.column(c).iter().copied().collect();
            let mut out = vec![0.0; n];
            a.apply(&col, &mut out);
            aq.set_column(c, &DVector::from_vec(out));
        }
        let mut hm = q.transpose() * &aq;
        hm = (&hm + hm.transpose()) * 0.5;
        let eig = SymmetricEigen::new(hm);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&u, &v| eig.eigenvalues[u].total_cmp(&eig.eigenvalues[v]));
        let s = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        x = &q * &s;
        ax.copy_from(&(&aq * &s));
        let res: Vec<f64> = (0..k)
            .map(|c| (ax.column(c) - x.column(c) * theta[c]).norm() / theta[c])
            .collect();
        locked = res.iter().take_while(|&&r| r <= opts.tol).count();
        last_res = res.iter().copied().fold(0.0, f64::max);
        if locked == k {
            return Ok(EigenOutcome {
                values: theta[..k].to_vec(),
                rel_residual: last_res,
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged {
        solver: "subspace iteration",
        iterations: opts.max_iter,
        residual: last_res,
    })
}
