//! Exact discrete geometry: measure, face-count perimeter and diameters.

use super::components::label_components;
use super::{Axis, GridDomain, Strip, DIM};
use crate::error::{Error, Result};

/// Ratio between the face-count perimeter of a fine raster disk and its
/// Euclidean perimeter in the plane.
pub const PERIMETER_ANISOTROPY: f64 = 4.0 / std::f64::consts::PI;

/// Occupied-cell count times `h^N`.
pub fn measure(d: &GridDomain) -> f64 {
    d.cell_count() as f64 * d.h().powi(DIM as i32)
}

/// Number of lattice faces between occupied and empty cells, times `h^{N-1}`.
pub fn perimeter(d: &GridDomain) -> f64 {
    boundary_faces(d) as f64 * d.h().powi(DIM as i32 - 1)
}

pub(crate) fn boundary_faces(d: &GridDomain) -> usize {
    d.occupied()
        .map(|(i, j)| {
            let (i, j) = (i as isize, j as isize);
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter(|(di, dj)| !d.get(i + di, j + dj))
                .count()
        })
        .sum()
}

/// Length of the set of slabs orthogonal to `axis` that meet the domain.
pub fn diam_e(d: &GridDomain, axis: Axis) -> f64 {
    occupied_slabs(d, axis).iter().filter(|&&o| o).count() as f64 * d.h()
}

pub(crate) fn occupied_slabs(d: &GridDomain, axis: Axis) -> Vec<bool> {
    let mut slabs = vec![false; d.len_along(axis)];
    for (i, j) in d.occupied() {
        slabs[if axis == Axis::X { i } else { j }] = true;
    }
    slabs
}

/// Closed coordinate range `[lo, hi]` covered by occupied cells along `axis`.
pub fn extent(d: &GridDomain, axis: Axis) -> Option<(f64, f64)> {
    let slabs = occupied_slabs(d, axis);
    let first = slabs.iter().position(|&o| o)?;
    let last = slabs.iter().rposition(|&o| o)?;
    let o = d.origin()[axis.index()];
    Some((o + first as f64 * d.h(), o + (last + 1) as f64 * d.h()))
}

/// Sum over connected components of the largest distance between occupied
/// cell centers, each corrected by the cell extent `h sqrt(N)`.
pub fn diameter(d: &GridDomain) -> f64 {
    let labels = label_components(d);
    let mut rows: Vec<Vec<(i64, i64)>> = vec![Vec::new(); labels.count];
    // Extreme cells of each row suffice for the convex hull.
    for j in 0..d.ny() {
        let mut run: Option<(u32, usize, usize)> = None;
        let mut flush = |run: &mut Option<(u32, usize, usize)>| {
            if let Some((l, a, b)) = run.take() {
                let pts = &mut rows[l as usize - 1];
                pts.push((a as i64, j as i64));
                pts.push((b as i64, j as i64));
            }
        };
        for i in 0..d.nx() {
            let l = labels.label(i, j);
            match (&mut run, l) {
                (Some((cur, _, end)), Some(l)) if *cur == l => *end = i,
                (_, Some(l)) => {
                    flush(&mut run);
                    run = Some((l, i, i));
                }
                (_, None) => flush(&mut run),
            }
        }
        flush(&mut run);
    }
    let cell = d.h() * (DIM as f64).sqrt();
    rows.iter()
        .map(|pts| farthest_pair(pts) * d.h() + cell)
        .sum()
}

/// Largest distance between any two occupied cells of the whole set, plus the
/// cell extent. Differs from [`diameter`] for disconnected sets.
pub fn set_diameter(d: &GridDomain) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    let mut pts = Vec::new();
    for j in 0..d.ny() {
        let row = (0..d.nx()).filter(|&i| d.is_occupied(i, j));
        let (mut lo, mut hi) = (usize::MAX, 0);
        for i in row {
            lo = lo.min(i);
            hi = hi.max(i);
        }
        if lo != usize::MAX {
            pts.push((lo as i64, j as i64));
            pts.push((hi as i64, j as i64));
        }
    }
    farthest_pair(&pts) * d.h() + d.h() * (DIM as f64).sqrt()
}

fn farthest_pair(points: &[(i64, i64)]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0i64;
    for (k, a) in hull.iter().enumerate() {
        for b in &hull[k + 1..] {
            let (dx, dy) = (a.0 - b.0, a.1 - b.1);
            best = best.max(dx * dx + dy * dy);
        }
    }
    (best as f64).sqrt()
}

fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Clears every cell whose center lies in one of the strips.
///
/// Strips must be pairwise disjoint and at least `2h` wide on each side.
/// Returns [`Error::EmptyDomain`] if nothing is left.
pub fn remove_strips(d: &GridDomain, strips: &[Strip]) -> Result<GridDomain> {
    for (k, s) in strips.iter().enumerate() {
        if s.half_width < 2.0 * d.h() * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "strip half-width {} is below 2h = {}",
                s.half_width,
                2.0 * d.h()
            )));
        }
        if strips[k + 1..].iter().any(|o| !s.is_disjoint(o)) {
            return Err(Error::InvalidArgument("strips overlap".into()));
        }
    }
    let out = cut_strips(d, strips);
    if out.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(out)
}

/// [`remove_strips`] without validation; the result may be empty.
pub(crate) fn cut_strips(d: &GridDomain, strips: &[Strip]) -> GridDomain {
    d.retain(|i, j| !in_any_strip(d, strips, i, j))
}

pub(crate) fn in_any_strip(d: &GridDomain, strips: &[Strip], i: usize, j: usize) -> bool {
    strips.iter().any(|s| {
        let idx = if s.axis == Axis::X { i } else { j };
        s.contains(d.center_coord(s.axis, idx))
    })
}
