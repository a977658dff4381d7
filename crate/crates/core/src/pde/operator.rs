//! The five-point Dirichlet Laplacian on occupied cells.
//!
//! Everything here works with the dimensionless matrix `A = h^2 (-Delta_h)`,
//! which has 4 on the diagonal and -1 for each occupied face neighbour. Its
//! entries do not depend on `h`, so one factorization or eigensolve serves
//! every rescaling of a domain.

use crate::domain::{Axis, GridDomain};

pub(crate) const NONE: u32 = u32::MAX;

/// Numbering of the occupied cells.
///
/// Cells are numbered slice by slice along the longer window axis, so that
/// the matrix bandwidth is bounded by the shorter window extent.
#[derive(Clone, Debug)]
pub struct DofMap {
    nx: usize,
    index: Vec<u32>,
    cells: Vec<(usize, usize)>,
    major: Axis,
}

impl DofMap {
    pub fn new(d: &GridDomain) -> Self {
        let (nx, ny) = (d.nx(), d.ny());
        let major = if nx >= ny { Axis::X } else { Axis::Y };
        let mut index = vec![NONE; nx * ny];
        let mut cells = Vec::with_capacity(d.cell_count());
        let mut visit = |i: usize, j: usize| {
            if d.is_occupied(i, j) {
                index[j * nx + i] = cells.len() as u32;
                cells.push((i, j));
            }
        };
        match major {
            Axis::X => (0..nx).for_each(|i| (0..ny).for_each(|j| visit(i, j))),
            Axis::Y => (0..ny).for_each(|j| (0..nx).for_each(|i| visit(i, j))),
        }
        DofMap {
            nx,
            index,
            cells,
            major,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn major_axis(&self) -> Axis {
        self.major
    }

    /// Window cell of a degree of freedom.
    pub fn cell(&self, dof: usize) -> (usize, usize) {
        self.cells[dof]
    }

    pub fn dof(&self, i: usize, j: usize) -> Option<usize> {
        match self.index[j * self.nx + i] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// Spreads a per-dof vector over the full window, zero elsewhere.
    pub fn scatter(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.index.len()];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            out[j * self.nx + i] = values[k];
        }
        out
    }
}

/// Sparse `A` stored as neighbour lists.
#[derive(Clone, Debug)]
pub struct Laplacian {
    nbr: Vec<[u32; 4]>,
}

impl Laplacian {
    pub fn new(map: &DofMap) -> Self {
        let nx = map.nx as isize;
        let nbr = map
            .cells
            .iter()
            .map(|&(i, j)| {
                let k = j as isize * nx + i as isize;
                // margin guarantees all four neighbours are in the window
                [k - 1, k + 1, k - nx, k + nx].map(|n| map.index[n as usize])
            })
            .collect();
        Laplacian { nbr }
    }

    pub fn len(&self) -> usize {
        self.nbr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nbr.is_empty()
    }

    pub fn diagonal(&self) -> f64 {
        4.0
    }

    /// Occupied neighbours of a dof.
    pub fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.nbr[k]
            .iter()
            .filter(|&&n| n != NONE)
            .map(|&n| n as usize)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (k, nb) in self.nbr.iter().enumerate() {
            let mut s = 4.0 * x[k];
            for &n in nb {
                if n != NONE {
                    s -= x[n as usize];
                }
            }
            y[k] = s;
        }
    }

    /// Dense copy, for small systems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = 4.0;
            for n in self.neighbours(k) {
                m[(k, n)] = -1.0;
            }
        }
        m
    }
}
