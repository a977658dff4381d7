//! Face-adjacency components and ball replacement.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::geometry::boundary_faces;
use super::raster::discrete_ball_offsets;
use super::GridDomain;
use crate::error::{Error, Result};

/// Component labels over a domain window. Label 0 is empty space; components
/// are numbered from 1 in row-major order of their first cell.
#[derive(Clone, Debug)]
pub struct Labels {
    nx: usize,
    labels: Vec<u32>,
    pub count: usize,
}

impl Labels {
    pub fn label(&self, i: usize, j: usize) -> Option<u32> {
        match self.labels[j * self.nx + i] {
            0 => None,
            l => Some(l),
        }
    }

    pub fn raw(&self) -> &[u32] {
        &self.labels
    }

    /// Cell count and bounding index ranges of each component, by label.
    pub fn components(&self) -> Vec<ComponentInfo> {
        let mut out: Vec<ComponentInfo> = (1..=self.count as u32)
            .map(|label| ComponentInfo {
                label,
                cell_count: 0,
                i_range: (usize::MAX, 0),
                j_range: (usize::MAX, 0),
            })
            .collect();
        for (k, &l) in self.labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let (i, j) = (k % self.nx, k / self.nx);
            let c = &mut out[l as usize - 1];
            c.cell_count += 1;
            c.i_range = (c.i_range.0.min(i), c.i_range.1.max(i));
            c.j_range = (c.j_range.0.min(j), c.j_range.1.max(j));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub label: u32,
    pub cell_count: usize,
    /// Inclusive window index range along the first axis.
    pub i_range: (usize, usize),
    /// Inclusive window index range along the second axis.
    pub j_range: (usize, usize),
}

pub fn label_components(d: &GridDomain) -> Labels {
    let (nx, ny) = (d.nx(), d.ny());
    let mut labels = vec![0u32; nx * ny];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..nx * ny {
        if !d.cells()[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            // The empty margin keeps all four neighbours inside the window.
            for n in [k - 1, k + 1, k - nx, k + nx] {
                if d.cells()[n] && labels[n] == 0 {
                    labels[n] = count;
                    queue.push_back(n);
                }
            }
        }
    }
    Labels {
        nx,
        labels,
        count: count as usize,
    }
}

/// Each component as its own domain on the input window.
pub fn connected_components(d: &GridDomain) -> Vec<GridDomain> {
    let labels = label_components(d);
    (1..=labels.count as u32)
        .map(|l| d.retain(|i, j| labels.label(i, j) == Some(l)))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplacementShape {
    /// Cells nearest to a lattice node in the Euclidean norm.
    #[default]
    Disk,
    /// Cells nearest in the max norm; minimizes the face-count perimeter.
    Square,
}

impl std::str::FromStr for ReplacementShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "disk" => Ok(ReplacementShape::Disk),
            "square" => Ok(ReplacementShape::Square),
            other => Err(Error::Config(format!(
                "replacement shape must be disk or square, got `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BallReplacement {
    pub domain: GridDomain,
    pub replaced: Vec<ComponentInfo>,
    pub ball_cells: usize,
    /// Lattice center of the inserted ball in coordinates, if any.
    pub ball_center: Option<[f64; 2]>,
    pub perimeter_before: f64,
    pub perimeter_after: f64,
    /// The perimeter grew by more than `4h`.
    pub perimeter_flag: bool,
}

/// Replaces every component for which `keep` is false by a single raster ball
/// with the same total cell count.
///
/// The ball is placed above the kept cells along the second axis, two empty
/// rows away, and centered on the kept first-axis range. The window grows as
/// needed.
pub fn replace_components_with_ball<F>(
    d: &GridDomain,
    mut keep: F,
    shape: ReplacementShape,
) -> Result<BallReplacement>
where
    F: FnMut(&ComponentInfo) -> bool,
{
    let labels = label_components(d);
    let infos = labels.components();
    let keep_flags: Vec<bool> = infos.iter().map(&mut keep).collect();
    let replaced: Vec<ComponentInfo> = infos
        .iter()
        .zip(&keep_flags)
        .filter(|(_, &k)| !k)
        .map(|(c, _)| c.clone())
        .collect();
    let faces_before = boundary_faces(d);
    let h = d.h();
    if replaced.is_empty() {
        return Ok(BallReplacement {
            domain: d.clone(),
            replaced,
            ball_cells: 0,
            ball_center: None,
            perimeter_before: faces_before as f64 * h,
            perimeter_after: faces_before as f64 * h,
            perimeter_flag: false,
        });
    }
    let ball_cells: usize = replaced.iter().map(|c| c.cell_count).sum();
    let kept: Vec<(i64, i64)> = d
        .occupied()
        .filter(|&(i, j)| {
            let l = labels.label(i, j).expect("occupied cell is labelled");
            keep_flags[l as usize - 1]
        })
        .map(|(i, j)| (i as i64, j as i64))
        .collect();

    let offsets = discrete_ball_offsets(ball_cells, shape);
    let (bx0, bx1, by0, _) = bbox(&offsets);
    let (cx, cy) = if kept.is_empty() {
        // Nothing kept: put the ball where the removed mass was.
        let (mut sx, mut sy) = (0i64, 0i64);
        let mut n = 0i64;
        for c in &replaced {
            sx += (c.i_range.0 + c.i_range.1) as i64;
            sy += (c.j_range.0 + c.j_range.1) as i64;
            n += 2;
        }
        (sx.div_euclid(n), sy.div_euclid(n))
    } else {
        let (kx0, kx1, _, ky1) = bbox(&kept);
        let cx = (kx0 + kx1).div_euclid(2) - (bx0 + bx1).div_euclid(2);
        let cy = ky1 + 3 - by0;
        (cx, cy)
    };
    let cells = kept
        .iter()
        .copied()
        .chain(offsets.iter().map(|&(a, b)| (a + cx, b + cy)));
    let domain = GridDomain::from_lattice_cells(h, d.origin(), cells)?;
    let faces_after = boundary_faces(&domain);
    Ok(BallReplacement {
        domain,
        replaced,
        ball_cells,
        ball_center: Some([d.origin()[0] + cx as f64 * h, d.origin()[1] + cy as f64 * h]),
        perimeter_before: faces_before as f64 * h,
        perimeter_after: faces_after as f64 * h,
        perimeter_flag: faces_after > faces_before + 4,
    })
}

fn bbox(cells: &[(i64, i64)]) -> (i64, i64, i64, i64) {
    cells.iter().fold(
        (i64::MAX, i64::MIN, i64::MAX, i64::MIN),
        |(a0, a1, b0, b1), &(a, b)| (a0.min(a), a1.max(a), b0.min(b), b1.max(b)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{measure, perimeter};

    fn rect(a0: i64, a1: i64, b0: i64, b1: i64) -> impl Iterator<Item = (i64, i64)> {
        (a0..a1).flat_map(move |a| (b0..b1).map(move |b| (a, b)))
    }

    #[test]
    fn square_is_one_component() {
        let d = GridDomain::from_lattice_cells(0.1, [0.0, 0.0], rect(0, 10, 0, 10)).unwrap();
        assert_eq!(connected_components(&d).len(), 1);
    }

    #[test]
    fn diagonal_contact_splits() {
        let d = GridDomain::from_lattice_cells(1.0, [0.0, 0.0], [(0, 0), (1, 1)]).unwrap();
        let comps = connected_components(&d);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.cell_count() == 1));
    }

    #[test]
    fn nothing_discarded_is_identity() {
        let d = GridDomain::from_lattice_cells(0.1, [0.0, 0.0], rect(0, 10, 0, 10)).unwrap();
        let r = replace_components_with_ball(&d, |_| true, ReplacementShape::Disk).unwrap();
        assert_eq!(r.domain, d);
        assert_eq!(r.ball_cells, 0);
    }

    #[test]
    fn discarded_square_becomes_ball_of_same_measure() {
        let n = 64;
        let h = 1.0 / n as f64;
        let cells = rect(0, n, 0, n).chain(rect(3 * n, 4 * n, 0, n));
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], cells).unwrap();
        let disk =
            replace_components_with_ball(&d, |c| c.i_range.0 < 10, ReplacementShape::Disk).unwrap();
        assert_eq!(measure(&disk.domain), measure(&d));
        assert_eq!(connected_components(&disk.domain).len(), 2);
        // A raster disk has more faces than a square of the same area.
        assert!(disk.perimeter_flag);
        let square =
            replace_components_with_ball(&d, |c| c.i_range.0 < 10, ReplacementShape::Square)
                .unwrap();
        assert!(!square.perimeter_flag);
        assert_eq!(perimeter(&square.domain), perimeter(&d));
    }

    #[test]
    fn two_small_squares_merge_into_one_ball() {
        let n = 128;
        let h = 1.0 / n as f64;
        let half = n / 2;
        let cells = rect(0, n, 0, n)
            .chain(rect(2 * n, 2 * n + half, 0, half))
            .chain(rect(3 * n, 3 * n + half, 0, half));
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], cells).unwrap();
        let r =
            replace_components_with_ball(&d, |c| c.i_range.0 < 10, ReplacementShape::Disk).unwrap();
        assert_eq!(r.replaced.len(), 2);
        let comps = connected_components(&r.domain);
        assert_eq!(comps.len(), 2);
        let ball = comps
            .iter()
            .find(|c| c.cell_count() != (n * n) as usize)
            .unwrap();
        assert!((measure(ball) - 0.5).abs() <= h * h);
        // face-count perimeter of a disk with area 0.5, against 4 for the two squares
        let expect = 2.0 * (0.5 * std::f64::consts::PI).sqrt() * 4.0 / std::f64::consts::PI;
        assert!(
            (perimeter(ball) - expect).abs() < 0.05,
            "{}",
            perimeter(ball)
        );
        assert!(perimeter(ball) < 4.0);
    }

    #[test]
    fn all_discarded_keeps_measure() {
        let d = GridDomain::from_lattice_cells(0.1, [0.0, 0.0], rect(0, 30, 0, 2)).unwrap();
        let r = replace_components_with_ball(&d, |_| false, ReplacementShape::Disk).unwrap();
        assert_eq!(r.domain.cell_count(), d.cell_count());
        assert!(perimeter(&r.domain) < perimeter(&d));
    }
}
