//! Rasterization of analytic shapes.

use serde::{Deserialize, Serialize};

use super::components::ReplacementShape;
use super::GridDomain;
use crate::error::{Error, Result};

/// Where the lattice sits relative to the coordinate axes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alignment {
    /// Cell edges lie on `h Z`; an axis-aligned box with corners on the
    /// lattice is tiled exactly.
    #[default]
    CellCentered,
    /// Cell centers lie on `h Z`, matching a node-based finite-difference grid
    /// whose boundary nodes are excluded.
    NodeCentered,
}

/// Axis-aligned bounding box of a shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Bounds { min, max }
    }
}

/// Occupies every cell whose center satisfies `inside`. Only cells with
/// centers inside `bounds` are tested.
pub fn rasterize<F>(inside: F, bounds: Bounds, h: f64, alignment: Alignment) -> Result<GridDomain>
where
    F: Fn([f64; 2]) -> bool,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be positive, got {h}"
        )));
    }
    let shift = match alignment {
        Alignment::CellCentered => 0.5,
        Alignment::NodeCentered => 0.0,
    };
    let range = |a: usize| {
        let lo = (bounds.min[a] / h - shift).floor() as i64 - 1;
        let hi = (bounds.max[a] / h - shift).ceil() as i64 + 1;
        lo..=hi
    };
    let mut cells = Vec::new();
    for b in range(1) {
        let y = (b as f64 + shift) * h;
        for a in range(0) {
            let x = (a as f64 + shift) * h;
            if inside([x, y]) {
                cells.push((a, b));
            }
        }
    }
    let origin = [(shift - 0.5) * h, (shift - 0.5) * h];
    GridDomain::from_lattice_cells(h, origin, cells)
}

/// Exactly `count` lattice cells closest to the node at the origin, ordered
/// by distance with a fixed tie-break. Cell `(a, b)` has center
/// `(a + 1/2, b + 1/2)` in cell units.
pub fn discrete_ball_offsets(count: usize, shape: ReplacementShape) -> Vec<(i64, i64)> {
    if count == 0 {
        return Vec::new();
    }
    // radius of a disk with `count` cells, which also covers the square
    let r = (count as f64 / std::f64::consts::PI).sqrt().ceil() as i64 + 2;
    let mut cells: Vec<(i64, i64, i64, i64)> = Vec::with_capacity((2 * r * r) as usize * 2);
    for b in -r..r {
        for a in -r..r {
            // doubled center coordinates are odd integers
            let (x, y) = (2 * a + 1, 2 * b + 1);
            let key = match shape {
                ReplacementShape::Disk => x * x + y * y,
                ReplacementShape::Square => x.abs().max(y.abs()),
            };
            cells.push((key, x * x + y * y, a, b));
        }
    }
    // Ties in distance are broken by angle-free lattice order, which keeps the
    // result deterministic but not perfectly symmetric.
    cells.sort_unstable_by_key(|&(k, e, a, b)| (k, e, b, a));
    cells.truncate(count);
    cells.into_iter().map(|(_, _, a, b)| (a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{measure, perimeter};
    use std::f64::consts::PI;

    fn square(h: f64, align: Alignment) -> GridDomain {
        rasterize(
            |p| p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0,
            Bounds::new([0.0, 0.0], [1.0, 1.0]),
            h,
            align,
        )
        .unwrap()
    }

    #[test]
    fn cell_centered_square_is_exact() {
        let d = square(1.0 / 256.0, Alignment::CellCentered);
        assert_eq!(d.cell_count(), 256 * 256);
        assert_eq!(measure(&d), 1.0);
        assert_eq!(perimeter(&d), 4.0);
        assert_eq!(d.origin()[0] + d.h(), 0.0);
    }

    #[test]
    fn node_centered_square_drops_boundary_nodes() {
        let d = square(1.0 / 16.0, Alignment::NodeCentered);
        assert_eq!(d.cell_count(), 15 * 15);
        assert_eq!(d.cell_center(1, 1), [1.0 / 16.0, 1.0 / 16.0]);
    }

    #[test]
    fn disk_area() {
        let r = 1.0 / PI.sqrt();
        let d = rasterize(
            |p| p[0] * p[0] + p[1] * p[1] < r * r,
            Bounds::new([-r, -r], [r, r]),
            1.0 / 512.0,
            Alignment::CellCentered,
        )
        .unwrap();
        assert!((measure(&d) - 1.0).abs() < 0.01);
        let expect = 2.0 * PI.sqrt() * 4.0 / PI;
        assert!((perimeter(&d) - expect).abs() < 0.02, "{}", perimeter(&d));
    }

    #[test]
    fn ball_offsets_count_and_shape() {
        for n in [1usize, 2, 5, 17, 100, 1001] {
            for shape in [ReplacementShape::Disk, ReplacementShape::Square] {
                let o = discrete_ball_offsets(n, shape);
                assert_eq!(o.len(), n);
                let mut s = o.clone();
                s.sort();
                s.dedup();
                assert_eq!(s.len(), n);
            }
        }
        let four = discrete_ball_offsets(4, ReplacementShape::Disk);
        let mut four_sorted = four.clone();
        four_sorted.sort();
        assert_eq!(four_sorted, vec![(-1, -1), (-1, 0), (0, -1), (0, 0)]);
    }
}
