//! Torsion function: `-Delta_h w = 1` on occupied cells, `w = 0` elsewhere.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cg::conjugate_gradient;
use super::operator::{DofMap, Laplacian};
use crate::domain::{Axis, GridDomain, Strip};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionOptions {
    /// Relative residual target of the linear solve.
    pub tol: f64,
    /// Iteration cap; `None` scales with the number of cells.
    pub max_iter: Option<usize>,
}

impl Default for TorsionOptions {
    fn default() -> Self {
        TorsionOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TorsionField {
    domain: GridDomain,
    /// One value per window cell, row-major; zero off the domain.
    values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve_torsion(d: &GridDomain, opts: &TorsionOptions) -> Result<TorsionField> {
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let map = DofMap::new(d);
    let a = Laplacian::new(&map);
    let n = map.len();
    let b = vec![1.0; n];
    let mut v = vec![0.0; n];
    let cap = opts.max_iter.unwrap_or(4 * n + 100);
    let out = conjugate_gradient(&a, &b, &mut v, opts.tol, cap)?;
    let h2 = d.h() * d.h();
    let vmax = v.iter().copied().fold(0.0, f64::max);
    let mut clamped = 0usize;
    for x in v.iter_mut() {
        if *x < 0.0 {
            clamped += 1;
            if *x < -opts.tol * vmax {
                log::warn!("torsion value {x:e} below solver tolerance clamped to zero");
            }
            *x = 0.0;
        }
        *x *= h2;
    }
    if clamped > 0 {
        log::warn!("{clamped} negative torsion values clamped to zero");
    }
    Ok(TorsionField {
        domain: d.clone(),
        values: map.scatter(&v),
        residual: out.relative_residual,
        iterations: out.iterations,
    })
}

impl TorsionField {
    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.index(i, j)]
    }

    fn get(&self, i: isize, j: isize) -> f64 {
        if i < 0 || j < 0 || i as usize >= self.domain.nx() || j as usize >= self.domain.ny() {
            0.0
        } else {
            self.value(i as usize, j as usize)
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sum w h^N`, the L1 norm.
    pub fn integral(&self) -> f64 {
        let h = self.domain.h();
        self.values.iter().sum::<f64>() * h * h
    }

    /// Largest `-Delta_h w - 1` over the window, with `w` extended by zero.
    pub fn laplacian_defect(&self) -> f64 {
        let h2 = self.domain.h() * self.domain.h();
        let mut worst = f64::NEG_INFINITY;
        for j in 0..self.domain.ny() as isize {
            for i in 0..self.domain.nx() as isize {
                let c = self.get(i, j);
                let lap = (4.0 * c
                    - self.get(i - 1, j)
                    - self.get(i + 1, j)
                    - self.get(i, j - 1)
                    - self.get(i, j + 1))
                    / h2;
                worst = worst.max(lap - 1.0);
            }
        }
        worst
    }

    /// Maximum over each slab orthogonal to `axis`, indexed by window slab.
    pub fn slab_max(&self, axis: Axis) -> Vec<f64> {
        let mut out = vec![0.0f64; self.domain.len_along(axis)];
        let nx = self.domain.nx();
        for (k, &w) in self.values.iter().enumerate() {
            let idx = if axis == Axis::X { k % nx } else { k / nx };
            out[idx] = out[idx].max(w);
        }
        out
    }

    /// Values for the domain rescaled by `t`.
    pub fn rescaled(&self, t: f64) -> Result<TorsionField> {
        let t2 = t * t;
        Ok(TorsionField {
            domain: self.domain.rescale(t)?,
            values: self.values.iter().map(|v| v * t2).collect(),
            ..self.clone()
        })
    }
}

/// `-1/2 sum w h^N`.
pub fn torsion_energy(f: &TorsionField) -> f64 {
    -0.5 * f.integral()
}

/// Largest torsion value over cells whose center lies in `s`; zero if none.
pub fn strip_max(f: &TorsionField, s: &Strip) -> f64 {
    let d = f.domain();
    let slabs = f.slab_max(s.axis);
    slabs
        .iter()
        .enumerate()
        .filter(|&(idx, _)| s.contains(d.center_coord(s.axis, idx)))
        .map(|(_, &w)| w)
        .fold(0.0, f64::max)
}

/// L1 distance between the torsion functions of two domains on one lattice.
pub fn gamma_distance(d1: &GridDomain, d2: &GridDomain, opts: &TorsionOptions) -> Result<f64> {
    let f1 = solve_torsion(d1, opts)?;
    let f2 = solve_torsion(d2, opts)?;
    gamma_distance_fields(&f1, &f2)
}

pub fn gamma_distance_fields(f1: &TorsionField, f2: &TorsionField) -> Result<f64> {
    let (d1, d2) = (f1.domain(), f2.domain());
    let (di, dj) = d1.lattice_offset(d2)?;
    let mut sum = 0.0;
    for (i, j) in d1.occupied() {
        let w2 = f2.get(i as isize - di as isize, j as isize - dj as isize);
        sum += (f1.value(i, j) - w2).abs();
    }
    for (i, j) in d2.occupied() {
        if !d1.get(i as isize + di as isize, j as isize + dj as isize) {
            sum += f2.value(i, j);
        }
    }
    Ok(sum * d1.h() * d1.h())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionHeader {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
    pub residual: f64,
    /// Layout of the companion binary file.
    pub layout: String,
}

/// Writes the window values as little-endian `f64` to `path` and a JSON
/// header next to it.
pub fn write_torsion(f: &TorsionField, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * f.values.len());
    for v in &f.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let header = TorsionHeader {
        nx: f.domain.nx(),
        ny: f.domain.ny(),
        h: f.domain.h(),
        origin: f.domain.origin(),
        residual: f.residual,
        layout: "f64 little-endian, row-major, row 0 at the lowest second coordinate".into(),
    };
    fs::write(
        path.with_extension("json"),
        serde_json::to_vec_pretty(&header)?,
    )?;
    Ok(())
}

/// Reads back a file written by [`write_torsion`].
pub fn read_torsion(path: &Path) -> Result<(TorsionHeader, Vec<f64>)> {
    let header: TorsionHeader = serde_json::from_slice(&fs::read(path.with_extension("json"))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * header.nx * header.ny {
        return Err(Error::InvalidArgument(format!(
            "torsion file has {} bytes, header implies {}",
            bytes.len(),
            8 * header.nx * header.ny
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, values))
}
