//! Active region, cut sites and cut depth along one axis.

use serde::{Deserialize, Serialize};

use super::constants::SurgeryConstants;
use crate::domain::{boundary_faces, Axis, GridDomain, Strip, DIM};
use crate::pde::TorsionField;

/// Per-slab face and cell counts of a domain along an axis. Removing whole
/// slabs changes the face count by quantities read off these tables.
#[derive(Clone, Debug)]
pub struct SlabStats {
    pub axis: Axis,
    /// Occupied cells in each slab.
    pub cells: Vec<usize>,
    /// Faces between an occupied cell of the slab and an empty cell.
    pub boundary: Vec<usize>,
    /// Faces shared by occupied cells of slab `s` and slab `s + 1`.
    pub cross: Vec<usize>,
    pub centers: Vec<f64>,
    pub h: f64,
    pub total_faces: usize,
}

impl SlabStats {
    pub fn new(d: &GridDomain, axis: Axis) -> Self {
        let len = d.len_along(axis);
        let mut cells = vec![0; len];
        let mut boundary = vec![0; len];
        let mut cross = vec![0; len];
        let step = match axis {
            Axis::X => (1isize, 0isize),
            Axis::Y => (0, 1),
        };
        for (i, j) in d.occupied() {
            let s = if axis == Axis::X { i } else { j };
            let (i, j) = (i as isize, j as isize);
            cells[s] += 1;
            boundary[s] += [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter(|(di, dj)| !d.get(i + di, j + dj))
                .count();
            if d.get(i + step.0, j + step.1) {
                cross[s] += 1;
            }
        }
        SlabStats {
            axis,
            cells,
            boundary,
            cross,
            centers: (0..len).map(|s| d.center_coord(axis, s)).collect(),
            h: d.h(),
            total_faces: boundary_faces(d),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Measure of the slabs whose center satisfies `inside`.
    pub fn mass_where<F: Fn(f64) -> bool>(&self, inside: F) -> f64 {
        let n: usize = self
            .centers
            .iter()
            .zip(&self.cells)
            .filter(|(&c, _)| inside(c))
            .map(|(_, &n)| n)
            .sum();
        n as f64 * self.cell_area()
    }

    /// Face accounting for removing the slabs flagged in `removed`.
    pub fn cut(&self, removed: &[bool]) -> CutAccount {
        let mut cells = 0;
        let mut lost = 0;
        let mut exposed = 0;
        for s in 0..self.len() {
            if removed[s] {
                cells += self.cells[s];
                lost += self.boundary[s];
            }
            if s + 1 < self.len() && removed[s] != removed[s + 1] {
                exposed += self.cross[s];
            }
        }
        CutAccount {
            cells,
            lost_faces: lost,
            exposed_faces: exposed,
            faces_after: self.total_faces + exposed - lost,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutAccount {
    pub cells: usize,
    /// Boundary faces of the input lying on removed cells.
    pub lost_faces: usize,
    /// New faces where kept cells meet removed cells.
    pub exposed_faces: usize,
    pub faces_after: usize,
}

/// Closed intervals of the axis around the slabs where the torsion function
/// reaches the strip threshold, dilated by `4 r0` and merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveRegion {
    pub axis: Axis,
    pub intervals: Vec<[f64; 2]>,
    pub hot_slabs: usize,
}

impl ActiveRegion {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&[a, b]| x >= a && x <= b)
    }

    /// Whether the closed interval `[lo, hi]` misses every interval.
    pub fn misses(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().all(|&[a, b]| hi < a || lo > b)
    }
}

pub fn detect_active_region(f: &TorsionField, c0r0: f64, r0: f64, axis: Axis) -> ActiveRegion {
    let d = f.domain();
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    let mut hot = 0;
    for (s, w) in f.slab_max(axis).into_iter().enumerate() {
        if w > 0.0 && w >= c0r0 {
            hot += 1;
            let x = d.center_coord(axis, s);
            push_merged(&mut intervals, [x - 4.0 * r0, x + 4.0 * r0]);
        }
    }
    ActiveRegion {
        axis,
        intervals,
        hot_slabs: hot,
    }
}

fn push_merged(v: &mut Vec<[f64; 2]>, iv: [f64; 2]) {
    match v.last_mut() {
        Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
        _ => v.push(iv),
    }
}

/// One cut position: strips centered at `base + dir * t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSite {
    pub base: f64,
    pub dir: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryPlan {
    pub axis: Axis,
    /// Active intervals after closing short gaps.
    pub intervals: Vec<[f64; 2]>,
    /// Gaps closed for being shorter than `8 r0 + 2 l0`.
    pub merged_short: usize,
    /// Gaps closed because `p` slides do not fit.
    pub merged_slides: usize,
    /// `4 r0 + l0`.
    pub slide_length: f64,
    /// Number of slides applied to the cut bands.
    pub slide: usize,
    /// Measure of the cut bands at the chosen slide.
    pub band_mass: f64,
    /// No slide brought the band mass to `m_hat`.
    pub mass_flag: bool,
    pub sites: Vec<CutSite>,
    pub r0: f64,
    pub l0: f64,
}

impl SurgeryPlan {
    /// Number of gaps between active intervals.
    pub fn gap_count(&self) -> usize {
        self.intervals.len().saturating_sub(1)
    }

    /// Removal strips at depth `t`.
    pub fn strips(&self, t: f64) -> Vec<Strip> {
        self.sites
            .iter()
            .map(|s| Strip {
                axis: self.axis,
                center: s.base + s.dir * t,
                half_width: self.r0,
            })
            .collect()
    }

    /// Depths `0, step, 2 step, ...` up to `l0`.
    pub fn depths(&self, step: f64) -> Vec<f64> {
        if self.sites.is_empty() {
            return vec![0.0];
        }
        let steps = (self.l0 / step + 1e-9).floor() as usize;
        (0..=steps).map(|j| j as f64 * step).collect()
    }
}

/// Cut bands `(lo, hi)` for a given slide: one band of length `len` beside
/// each end of each gap, and beside both outer ends.
fn bands(intervals: &[[f64; 2]], slide: usize, len: f64) -> Vec<(f64, f64)> {
    let off = slide as f64 * len;
    let mut out = Vec::with_capacity(2 * intervals.len());
    for iv in intervals {
        out.push((iv[0] - off - len, iv[0] - off));
        out.push((iv[1] + off, iv[1] + off + len));
    }
    out
}

fn band_mass(stats: &SlabStats, intervals: &[[f64; 2]], slide: usize, len: f64) -> f64 {
    let b = bands(intervals, slide, len);
    stats.mass_where(|x| b.iter().any(|&(lo, hi)| x > lo && x < hi))
}

fn close_gaps<F: Fn(f64, f64) -> bool>(intervals: &[[f64; 2]], close: F) -> (Vec<[f64; 2]>, usize) {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(intervals.len());
    let mut closed = 0;
    for &iv in intervals {
        match out.last_mut() {
            Some(last) if close(last[1], iv[0]) => {
                last[1] = iv[1];
                closed += 1;
            }
            _ => out.push(iv),
        }
    }
    (out, closed)
}

/// Chooses cut sites around the active region.
///
/// Gaps too short for two strips plus their slide room are closed. If the
/// bands next to the region hold more than `m_hat` of the mass, the bands are
/// slid outward by whole multiples of `4 r0 + l0`; gaps too short for `p`
/// slides are closed first. When no slide works the lightest one is used and
/// the plan is flagged.
pub fn plan_cuts(d: &GridDomain, region: &ActiveRegion, k: &SurgeryConstants) -> SurgeryPlan {
    let stats = SlabStats::new(d, region.axis);
    plan_cuts_with(&stats, region, k)
}

pub(crate) fn plan_cuts_with(
    stats: &SlabStats,
    region: &ActiveRegion,
    k: &SurgeryConstants,
) -> SurgeryPlan {
    let (r0, l0) = (k.r0, k.l0);
    let len = 4.0 * r0 + l0;
    let (mut intervals, merged_short) =
        close_gaps(&region.intervals, |a, b| b - a <= 8.0 * r0 + 2.0 * l0);
    let mut merged_slides = 0;
    let mut slide = 0;
    let mut mass = 0.0;
    let mut mass_flag = false;
    if !intervals.is_empty() {
        mass = band_mass(stats, &intervals, 0, len);
        if mass > k.m_hat {
            let reach = k.p as f64 * len;
            let (iv, closed) = close_gaps(&intervals, |a, b| a + reach > b - reach);
            intervals = iv;
            merged_slides = closed;
            let masses: Vec<f64> = (0..k.p.max(1))
                .map(|s| band_mass(stats, &intervals, s, len))
                .collect();
            match masses.iter().position(|&m| m <= k.m_hat) {
                Some(s) => slide = s,
                None => {
                    slide = masses
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.total_cmp(b.1))
                        .map_or(0, |(s, _)| s);
                    mass_flag = true;
                }
            }
            mass = masses[slide];
        }
    }
    let off = slide as f64 * len;
    let sites = intervals
        .iter()
        .flat_map(|iv| {
            [
                CutSite {
                    base: iv[0] - off - 2.0 * r0,
                    dir: -1.0,
                },
                CutSite {
                    base: iv[1] + off + 2.0 * r0,
                    dir: 1.0,
                },
            ]
        })
        .collect();
    SurgeryPlan {
        axis: region.axis,
        intervals,
        merged_short,
        merged_slides,
        slide_length: len,
        slide,
        band_mass: mass,
        mass_flag,
        sites,
        r0,
        l0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSample {
    pub t: f64,
    /// Removed measure.
    pub mass: f64,
    /// Faces created by the cut, times `h`.
    pub exposed: f64,
    /// Input boundary removed by the cut, times `h`.
    pub lost: f64,
    pub perimeter_cut: f64,
    /// Perimeter after rescaling back to the input measure.
    pub perimeter_rescaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthChoice {
    pub t: f64,
    pub perimeter_before: f64,
    pub chosen: DepthSample,
    /// No depth kept the rescaled perimeter at or below the input.
    pub flag: bool,
    pub scan: Vec<DepthSample>,
}

fn removed_slabs(stats: &SlabStats, strips: &[Strip]) -> Vec<bool> {
    stats
        .centers
        .iter()
        .map(|&c| strips.iter().any(|s| s.contains(c)))
        .collect()
}

/// Scans depths `t` (grid spacing unless `step` is given) and keeps the one minimizing the rescaled perimeter of
/// the cut domain among those not exceeding the input perimeter (ties to the
/// smallest `t`). If none qualifies the overall minimizer is returned with
/// the flag set.
pub fn select_cut_depth(d: &GridDomain, plan: &SurgeryPlan, step: Option<f64>) -> DepthChoice {
    let stats = SlabStats::new(d, plan.axis);
    select_cut_depth_with(&stats, d.cell_count(), plan, step)
}

pub(crate) fn select_cut_depth_with(
    stats: &SlabStats,
    total_cells: usize,
    plan: &SurgeryPlan,
    step: Option<f64>,
) -> DepthChoice {
    let h = stats.h;
    let n = DIM as f64;
    let before = stats.total_faces as f64 * h;
    let scan: Vec<DepthSample> = plan
        .depths(step.unwrap_or(h))
        .into_iter()
        .map(|t| {
            let acc = stats.cut(&removed_slabs(stats, &plan.strips(t)));
            let kept = total_cells - acc.cells;
            let per_cut = acc.faces_after as f64 * h;
            let rescaled = if kept == 0 {
                f64::INFINITY
            } else {
                (total_cells as f64 / kept as f64).powf((n - 1.0) / n) * per_cut
            };
            DepthSample {
                t,
                mass: acc.cells as f64 * h * h,
                exposed: acc.exposed_faces as f64 * h,
                lost: acc.lost_faces as f64 * h,
                perimeter_cut: per_cut,
                perimeter_rescaled: rescaled,
            }
        })
        .collect();
    let best = |admissible: &dyn Fn(&DepthSample) -> bool| {
        scan.iter()
            .filter(|s| admissible(s))
            .fold(None::<&DepthSample>, |acc, s| match acc {
                Some(a) if a.perimeter_rescaled <= s.perimeter_rescaled => Some(a),
                _ => Some(s),
            })
            .copied()
    };
    let tol = before * 1e-12;
    let (chosen, flag) = match best(&|s| s.perimeter_rescaled <= before + tol) {
        Some(s) => (s, false),
        None => (best(&|_| true).expect("at least one depth"), true),
    };
    DepthChoice {
        t: chosen.t,
        perimeter_before: before,
        chosen,
        flag,
        scan,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabSample {
    pub t: f64,
    /// Measure inside `[lo + t, hi - t]`.
    pub mass: f64,
    /// Faces cut by the two slab walls, times `h`.
    pub section: f64,
}

/// Mass and cross-section of the shrinking slab `[lo + t, hi - t]` for
/// `t = 0, h, ...` up to `t_max`.
pub fn slab_profile(d: &GridDomain, axis: Axis, lo: f64, hi: f64, t_max: f64) -> Vec<SlabSample> {
    let stats = SlabStats::new(d, axis);
    let h = d.h();
    let steps = (t_max / h + 1e-9).floor() as usize;
    (0..=steps)
        .map(|j| {
            let t = j as f64 * h;
            let inside: Vec<bool> = stats
                .centers
                .iter()
                .map(|&c| c >= lo + t && c <= hi - t)
                .collect();
            let acc = stats.cut(&inside);
            SlabSample {
                t,
                mass: acc.cells as f64 * h * h,
                section: acc.exposed_faces as f64 * h,
            }
        })
        .collect()
}

/// `|sum section * h - (mass(0) - mass(end))|` for a profile sampled at `h`.
pub fn coarea_defect(profile: &[SlabSample], h: f64) -> f64 {
    if profile.len() < 2 {
        return 0.0;
    }
    let integral: f64 = profile[..profile.len() - 1]
        .iter()
        .map(|s| s.section * h)
        .sum();
    (integral - (profile[0].mass - profile[profile.len() - 1].mass)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{perimeter, remove_strips};

    fn rect(a0: i64, a1: i64, b0: i64, b1: i64) -> impl Iterator<Item = (i64, i64)> {
        (a0..a1).flat_map(move |a| (b0..b1).map(move |b| (a, b)))
    }

    #[test]
    fn face_accounting_matches_recount() {
        let h = 1.0 / 40.0;
        let cells = rect(0, 12, 0, 12)
            .chain(rect(12, 28, 5, 8))
            .chain(rect(28, 40, 0, 12));
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], cells).unwrap();
        let stats = SlabStats::new(&d, Axis::X);
        for center in [0.1, 0.4, 0.5, 0.62, 0.9] {
            let strips = [Strip::new(Axis::X, center, 2.5 * h).unwrap()];
            let acc = stats.cut(&removed_slabs(&stats, &strips));
            let cut = remove_strips(&d, &strips).unwrap();
            assert_eq!(
                acc.faces_after as f64 * h,
                perimeter(&cut),
                "center {center}"
            );
            assert_eq!(d.cell_count() - acc.cells, cut.cell_count());
        }
    }

    #[test]
    fn gaps_close_by_rule() {
        let iv = [[0.0, 1.0], [1.5, 2.0], [5.0, 6.0]];
        let (out, n) = close_gaps(&iv, |a, b| b - a <= 1.0);
        assert_eq!(out, vec![[0.0, 2.0], [5.0, 6.0]]);
        assert_eq!(n, 1);
    }

    #[test]
    fn rectangle_profile_has_no_coarea_defect() {
        let h = 1.0 / 32.0;
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], rect(0, 32, 0, 9)).unwrap();
        let prof = slab_profile(&d, Axis::X, 0.25, 0.75, 0.2);
        assert!(coarea_defect(&prof, h) <= 1e-12);
        assert!(prof.windows(2).all(|w| w[1].mass <= w[0].mass));
    }
}
