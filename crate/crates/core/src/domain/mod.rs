//! Rasterized planar open sets.
//!
//! A [`GridDomain`] is a finite window of square cells of side `h`. Occupied
//! cells make up the set; the outermost ring of the window is always empty so
//! that the Dirichlet condition has somewhere to live. Cell `(i, j)` covers
//! `[ox + i h, ox + (i + 1) h] x [oy + j h, oy + (j + 1) h]` where `(ox, oy)`
//! is the window origin.
//!
//! Domains are immutable; every operation returns a new value.

mod components;
mod geometry;
mod io;
mod raster;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use components::{
    connected_components, label_components, replace_components_with_ball, BallReplacement,
    ComponentInfo, Labels, ReplacementShape,
};
pub(crate) use geometry::{boundary_faces, cut_strips};
pub use geometry::{
    diam_e, diameter, extent, measure, perimeter, remove_strips, set_diameter, PERIMETER_ANISOTROPY,
};
pub use io::{load_domain, save_domain, sidecar_path, DomainMeta};
pub use raster::{discrete_ball_offsets, rasterize, Alignment, Bounds};

/// Spatial dimension of the lattice.
pub const DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    /// First coordinate direction `e1`.
    X,
    /// Second coordinate direction `e2`.
    Y,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" | "e1" | "0" => Ok(Axis::X),
            "y" | "e2" | "1" => Ok(Axis::Y),
            other => Err(Error::InvalidArgument(format!("unknown axis `{other}`"))),
        }
    }
}

/// The closed slab `{x : |x[axis] - center| <= half_width}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub axis: Axis,
    pub center: f64,
    pub half_width: f64,
}

impl Strip {
    pub fn new(axis: Axis, center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "strip needs a finite center and positive half-width, got ({center}, {half_width})"
            )));
        }
        Ok(Strip {
            axis,
            center,
            half_width,
        })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, coord: f64) -> bool {
        coord >= self.lo() && coord <= self.hi()
    }

    /// Same center, twice the width.
    pub fn doubled(&self) -> Strip {
        Strip {
            half_width: 2.0 * self.half_width,
            ..*self
        }
    }

    pub fn is_disjoint(&self, other: &Strip) -> bool {
        self.axis == other.axis && (self.hi() < other.lo() || other.hi() < self.lo())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    cells: Vec<bool>,
    count: usize,
}

impl GridDomain {
    /// Builds a domain from a full occupancy window in row-major order
    /// (`cells[j * nx + i]`).
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2], cells: Vec<bool>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "spacing must be positive, got {h}"
            )));
        }
        if !origin.iter().all(|o| o.is_finite()) {
            return Err(Error::InvalidDomain("origin must be finite".into()));
        }
        if nx == 0 || ny == 0 || cells.len() != nx * ny {
            return Err(Error::InvalidDomain(format!(
                "window {nx}x{ny} does not match {} cells",
                cells.len()
            )));
        }
        for j in 0..ny {
            for i in 0..nx {
                let border = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
                if border && cells[j * nx + i] {
                    return Err(Error::InvalidDomain(format!(
                        "occupied cell ({i}, {j}) on the window border"
                    )));
                }
            }
        }
        let count = cells.iter().filter(|&&c| c).count();
        Ok(GridDomain {
            nx,
            ny,
            h,
            origin,
            cells,
            count,
        })
    }

    /// Builds the smallest window (plus margin) holding the given lattice
    /// cells. Lattice cell `(a, b)` has its lower corner at
    /// `origin + (a h, b h)`.
    pub fn from_lattice_cells<I>(h: f64, origin: [f64; 2], cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        let cells: Vec<(i64, i64)> = cells.into_iter().collect();
        if cells.is_empty() {
            return GridDomain::empty(h, origin);
        }
        let (mut amin, mut amax, mut bmin, mut bmax) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(a, b) in &cells {
            amin = amin.min(a);
            amax = amax.max(a);
            bmin = bmin.min(b);
            bmax = bmax.max(b);
        }
        let nx = (amax - amin + 3) as usize;
        let ny = (bmax - bmin + 3) as usize;
        let mut occ = vec![false; nx * ny];
        for (a, b) in cells {
            let i = (a - amin + 1) as usize;
            let j = (b - bmin + 1) as usize;
            occ[j * nx + i] = true;
        }
        let origin = [
            origin[0] + (amin - 1) as f64 * h,
            origin[1] + (bmin - 1) as f64 * h,
        ];
        GridDomain::new(nx, ny, h, origin, occ)
    }

    /// A domain with no occupied cells (a single empty cell window).
    pub fn empty(h: f64, origin: [f64; 2]) -> Result<Self> {
        GridDomain::new(1, 1, h, origin, vec![false])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Window size along `axis`.
    pub fn len_along(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn dim(&self) -> usize {
        DIM
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.cells[j * self.nx + i]
    }

    /// Occupancy lookup that treats everything outside the window as empty.
    #[inline]
    pub fn get(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && self.is_occupied(i as usize, j as usize)
    }

    /// Occupied cells in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.nx;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(k, _)| (k % nx, k / nx))
    }

    /// Center coordinate of cell index `idx` along `axis`.
    #[inline]
    pub fn center_coord(&self, axis: Axis, idx: usize) -> f64 {
        self.origin[axis.index()] + (idx as f64 + 0.5) * self.h
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.center_coord(Axis::X, i), self.center_coord(Axis::Y, j)]
    }

    /// Index of the cell containing `point`, if it is inside the window.
    pub fn locate(&self, point: [f64; 2]) -> Option<(usize, usize)> {
        let fi = ((point[0] - self.origin[0]) / self.h).floor();
        let fj = ((point[1] - self.origin[1]) / self.h).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Keeps the occupied cells for which `keep` returns true; the window is
    /// unchanged.
    pub fn retain<F>(&self, mut keep: F) -> GridDomain
    where
        F: FnMut(usize, usize) -> bool,
    {
        let mut cells = self.cells.clone();
        let mut count = 0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = j * self.nx + i;
                if cells[k] {
                    cells[k] = keep(i, j);
                    count += cells[k] as usize;
                }
            }
        }
        GridDomain {
            cells,
            count,
            ..self.clone()
        }
    }

    /// Dilation about the coordinate origin. Only the spacing and origin
    /// change; the occupancy is untouched.
    pub fn rescale(&self, t: f64) -> Result<GridDomain> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {t}"
            )));
        }
        Ok(GridDomain {
            h: t * self.h,
            origin: [t * self.origin[0], t * self.origin[1]],
            ..self.clone()
        })
    }

    /// The factor that [`GridDomain::normalized`] applies.
    pub fn unit_measure_factor(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(self.unit_spacing() / self.h)
    }

    /// Rescales to unit measure. Among the few representable spacings next to
    /// `count^{-1/N}` the one whose measure is closest to 1 is used, so the
    /// result is within one rounding of exact.
    pub fn normalized(&self) -> Result<GridDomain> {
        if self.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let h = self.unit_spacing();
        let t = h / self.h;
        Ok(GridDomain {
            h,
            origin: [t * self.origin[0], t * self.origin[1]],
            ..self.clone()
        })
    }

    fn unit_spacing(&self) -> f64 {
        let n = self.count as f64;
        let base = (1.0 / n).powf(1.0 / DIM as f64);
        let err = |h: f64| (n * h.powi(DIM as i32) - 1.0).abs();
        let mut best = base;
        let (mut up, mut down) = (base, base);
        for _ in 0..4 {
            up = next_up(up);
            down = next_down(down);
            for cand in [down, up] {
                if err(cand) < err(best) {
                    best = cand;
                }
            }
        }
        best
    }

    /// Offset `(di, dj)` such that cell `(i, j)` of `other` is cell
    /// `(i + di, j + dj)` of `self`.
    pub fn lattice_offset(&self, other: &GridDomain) -> Result<(i64, i64)> {
        if !same_spacing(self.h, other.h) {
            return Err(Error::SpacingMismatch(self.h, other.h));
        }
        let mut off = [0i64; 2];
        for (o, (a, b)) in off.iter_mut().zip(other.origin.iter().zip(&self.origin)) {
            let d = (a - b) / self.h;
            let r = d.round();
            if (d - r).abs() > 1e-6 {
                return Err(Error::LatticeMismatch);
            }
            *o = r as i64;
        }
        Ok((off[0], off[1]))
    }

    /// Whether every occupied cell of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &GridDomain) -> Result<bool> {
        let (di, dj) = other.lattice_offset(self)?;
        Ok(self
            .occupied()
            .all(|(i, j)| other.get(i as isize + di as isize, j as isize + dj as isize)))
    }

    /// Occupied cells as lattice coordinates relative to this window's origin.
    pub fn lattice_cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.occupied().map(|(i, j)| (i as i64, j as i64))
    }

    /// Smallest window (with margin) holding the same occupied cells.
    pub fn cropped(&self) -> Result<GridDomain> {
        if self.is_empty() {
            return GridDomain::empty(self.h, self.origin);
        }
        GridDomain::from_lattice_cells(self.h, self.origin, self.lattice_cells())
    }
}

fn same_spacing(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize) -> GridDomain {
        let cells = (0..n as i64).flat_map(|a| (0..n as i64).map(move |b| (a, b)));
        GridDomain::from_lattice_cells(1.0 / n as f64, [0.0, 0.0], cells).unwrap()
    }

    #[test]
    fn margin_is_enforced() {
        let err = GridDomain::new(2, 2, 1.0, [0.0, 0.0], vec![true, false, false, false]);
        assert!(matches!(err, Err(Error::InvalidDomain(_))));
        let ok = GridDomain::new(3, 3, 1.0, [0.0, 0.0], {
            let mut v = vec![false; 9];
            v[4] = true;
            v
        });
        assert_eq!(ok.unwrap().cell_count(), 1);
    }

    #[test]
    fn bad_spacing_rejected() {
        assert!(GridDomain::empty(0.0, [0.0, 0.0]).is_err());
        assert!(GridDomain::empty(f64::NAN, [0.0, 0.0]).is_err());
    }

    #[test]
    fn lattice_cells_round_trip_through_window() {
        let d = block(4);
        assert_eq!((d.nx(), d.ny()), (6, 6));
        assert_eq!(d.origin(), [-0.25, -0.25]);
        assert_eq!(d.cell_center(1, 1), [0.125, 0.125]);
    }

    #[test]
    fn rescale_changes_only_metadata() {
        let d = block(8);
        let r = d.rescale(2.0).unwrap();
        assert_eq!(r.cells(), d.cells());
        assert_eq!(r.h(), 2.0 * d.h());
        assert!(d.rescale(0.0).is_err());
        assert!(d.rescale(-1.0).is_err());
    }

    #[test]
    fn normalized_has_unit_measure() {
        for n in [3usize, 7, 10, 49, 97] {
            let d = block(n).rescale(0.37).unwrap().normalized().unwrap();
            assert!((measure(&d) - 1.0).abs() <= 2.0 * f64::EPSILON, "n={n}");
        }
    }

    #[test]
    fn subset_and_offsets() {
        let d = block(6);
        let smaller = d.retain(|i, _| i > 2);
        assert!(smaller.is_subset_of(&d).unwrap());
        assert!(!d.is_subset_of(&smaller).unwrap());
        let cropped = smaller.cropped().unwrap();
        assert!(cropped.is_subset_of(&d).unwrap());
        assert_ne!(cropped.nx(), d.nx());
        let other = block(6).rescale(1.5).unwrap();
        assert!(matches!(
            d.lattice_offset(&other),
            Err(Error::SpacingMismatch(..))
        ));
    }

    #[test]
    fn strip_membership_is_closed() {
        let s = Strip::new(Axis::X, 0.5, 0.1).unwrap();
        assert!(s.contains(0.41) && s.contains(0.59) && !s.contains(0.61));
        assert!(s.is_disjoint(&Strip::new(Axis::X, 0.75, 0.1).unwrap()));
        assert!(!s.is_disjoint(&s.doubled()));
        assert!(Strip::new(Axis::X, 0.0, 0.0).is_err());
    }
}
