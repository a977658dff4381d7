//! Envelope (profile) Cholesky factorization of `A - shift I`.
//!
//! Row `i` of the factor is stored densely from its first structural nonzero
//! up to the diagonal. The factor has no fill outside the envelope of `A`.

use super::operator::Laplacian;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &Laplacian, shift: f64) -> Result<Self> {
        let n = a.len();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            let f = a.neighbours(i).filter(|&j| j < i).min().unwrap_or(i);
            first.push(f);
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        let mut data = vec![0.0; total];
        for i in 0..n {
            let fi = first[i];
            let row_off = start[i];
            for j in a.neighbours(i).filter(|&j| j < i) {
                data[row_off + j - fi] = -1.0;
            }
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (head, tail) = data.split_at_mut(row_off);
                let rj = &head[start[j] + lo - fj..start[j] + j - fj];
                let ri = &tail[lo - fi..j - fi];
                let s = super::cg::dot(ri, rj);
                let ljj = head[start[j + 1] - 1];
                tail[j - fi] = (tail[j - fi] - s) / ljj;
            }
            let row = &data[row_off..row_off + i - fi];
            let d = a.diagonal() - shift - super::cg::dot(row, row);
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "shifted operator is not positive definite (pivot {d:e} at row {i})"
                )));
            }
            data[row_off + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { first, start, data })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `L L^T X = B` in place for `m` right-hand sides stored row-major
    /// (`x[i * m + c]` is entry `i` of column `c`). The factor is read once per
    /// sweep regardless of `m`.
    pub fn solve_block(&self, x: &mut [f64], m: usize) {
        let n = self.len();
        debug_assert_eq!(x.len(), n * m);
        let mut acc = vec![0.0; m];
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            acc.copy_from_slice(&x[i * m..(i + 1) * m]);
            for (off, &l) in row[..i - fi].iter().enumerate() {
                let k = fi + off;
                let xk = &x[k * m..(k + 1) * m];
                for c in 0..m {
                    acc[c] -= l * xk[c];
                }
            }
            let d = row[i - fi];
            for c in 0..m {
                x[i * m + c] = acc[c] / d;
            }
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let d = row[i - fi];
            for c in 0..m {
                x[i * m + c] /= d;
            }
            let (head, tail) = x.split_at_mut(i * m);
            let xi = &tail[..m];
            for (off, &l) in row[..i - fi].iter().enumerate() {
                let k = fi + off;
                let xk = &mut head[k * m..(k + 1) * m];
                for c in 0..m {
                    xk[c] -= l * xi[c];
                }
            }
        }
    }

    pub fn solve(&self, x: &mut [f64]) {
        self.solve_block(x, 1);
    }
}
