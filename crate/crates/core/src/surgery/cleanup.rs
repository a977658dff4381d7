//! Strip removal test and replacement of components far from the active
//! region.

use serde::{Deserialize, Serialize};

use super::constants::SurgeryConstants;
use super::plan::ActiveRegion;
use crate::domain::{
    cut_strips, label_components, measure, perimeter, replace_components_with_ball, ComponentInfo,
    GridDomain, ReplacementShape, Strip, DIM,
};
use crate::error::{Error, Result};
use crate::pde::{solve_torsion, strip_max, torsion_energy, TorsionField, TorsionOptions};

/// `E(d) + c |d|`; zero for the empty set.
pub fn penalized_energy(d: &GridDomain, c: f64, opts: &TorsionOptions) -> Result<f64> {
    if d.is_empty() {
        return Ok(0.0);
    }
    let f = solve_torsion(d, opts)?;
    Ok(torsion_energy(&f) + c * measure(d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripTest {
    pub strip: Strip,
    /// Torsion maximum over the doubled strip.
    pub doubled_max: f64,
    pub threshold: f64,
    pub passes: bool,
}

/// Whether the torsion function stays at or below `C0 r0` on the doubled
/// strip, which makes removing the strip energetically free.
pub fn strip_removal_test(
    f: &TorsionField,
    strip: &Strip,
    k: &SurgeryConstants,
) -> Result<StripTest> {
    if strip.half_width > k.r0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "strip half-width {} exceeds r0 = {}",
            strip.half_width, k.r0
        )));
    }
    let doubled_max = strip_max(f, &strip.doubled());
    Ok(StripTest {
        strip: *strip,
        doubled_max,
        threshold: k.c0r0,
        passes: doubled_max <= k.c0r0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalEffect {
    pub before: f64,
    pub after: f64,
    pub removed_cells: usize,
}

impl RemovalEffect {
    pub fn increase(&self) -> f64 {
        self.after - self.before
    }
}

/// Penalized energy before and after clearing the strips.
pub fn strip_removal_effect(
    d: &GridDomain,
    strips: &[Strip],
    c: f64,
    opts: &TorsionOptions,
) -> Result<RemovalEffect> {
    let cut = cut_strips(d, strips);
    Ok(RemovalEffect {
        before: penalized_energy(d, c, opts)?,
        after: penalized_energy(&cut, c, opts)?,
        removed_cells: d.cell_count() - cut.cell_count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentCheck {
    pub component: ComponentInfo,
    /// Largest torsion value of the uncut domain on the component.
    pub max_torsion: f64,
    /// `1 / max_torsion`, a lower bound on the first eigenvalue.
    pub lambda1_lower: f64,
    pub below_threshold: bool,
    /// `lambda1_lower >= 2K`.
    pub above_twice_k: bool,
    /// `lambda1_lower (1 - m_hat)^{2/N} >= K`.
    pub survives_rescale: bool,
    pub replaced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanupOutcome {
    #[serde(skip)]
    pub domain: Option<GridDomain>,
    pub checks: Vec<ComponentCheck>,
    pub ball_cells: usize,
    pub ball_center: Option<[f64; 2]>,
    pub perimeter_before: f64,
    pub perimeter_after: f64,
    pub perimeter_flag: bool,
}

impl CleanupOutcome {
    /// Nothing replaced.
    pub fn identity(d: &GridDomain) -> Self {
        let per = perimeter(d);
        CleanupOutcome {
            domain: Some(d.clone()),
            checks: Vec::new(),
            ball_cells: 0,
            ball_center: None,
            perimeter_before: per,
            perimeter_after: per,
            perimeter_flag: false,
        }
    }

    pub fn replaced(&self) -> usize {
        self.checks.iter().filter(|c| c.replaced).count()
    }

    /// Components that qualified by position but failed a spectral check and
    /// were kept.
    pub fn kept_flagged(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| {
                !c.replaced && !(c.below_threshold && c.above_twice_k && c.survives_rescale)
            })
            .count()
    }
}

/// Replaces by one ball every component of `cut` whose projection on the
/// region axis misses the active region, provided its spectral checks hold.
///
/// `field` is the torsion function of the uncut domain on the same lattice.
pub fn component_cleanup(
    cut: &GridDomain,
    region: &ActiveRegion,
    field: &TorsionField,
    k: &SurgeryConstants,
    shape: ReplacementShape,
) -> Result<CleanupOutcome> {
    let outer = field.domain();
    let (di, dj) = outer.lattice_offset(cut)?;
    let axis = region.axis;
    let labels = label_components(cut);
    let mut max_w = vec![0.0f64; labels.count];
    for (i, j) in cut.occupied() {
        let l = labels.label(i, j).expect("occupied cell is labelled") as usize - 1;
        let (p, q) = (i as i64 + di, j as i64 + dj);
        if p < 0 || q < 0 || !outer.is_occupied(p as usize, q as usize) {
            return Err(Error::NotSubset);
        }
        max_w[l] = max_w[l].max(field.value(p as usize, q as usize));
    }
    let shrink = (1.0 - k.m_hat).powf(2.0 / DIM as f64);
    let mut checks = Vec::new();
    let mut replace = vec![false; labels.count];
    for info in labels.components() {
        let range = match axis {
            crate::domain::Axis::X => info.i_range,
            crate::domain::Axis::Y => info.j_range,
        };
        let (lo, hi) = (
            cut.center_coord(axis, range.0),
            cut.center_coord(axis, range.1),
        );
        if !region.misses(lo, hi) {
            continue;
        }
        let w = max_w[info.label as usize - 1];
        let lower = if w > 0.0 { 1.0 / w } else { f64::INFINITY };
        let below = w <= k.c0r0;
        let twice = lower >= 2.0 * k.k_threshold;
        let survives = lower * shrink >= k.k_threshold;
        let ok = below && twice && survives;
        replace[info.label as usize - 1] = ok;
        if !ok {
            log::warn!(
                "component {} misses the active region but fails its checks (max w {w:e}); kept",
                info.label
            );
        }
        checks.push(ComponentCheck {
            component: info,
            max_torsion: w,
            lambda1_lower: lower,
            below_threshold: below,
            above_twice_k: twice,
            survives_rescale: survives,
            replaced: ok,
        });
    }
    let rep = replace_components_with_ball(cut, |c| !replace[c.label as usize - 1], shape)?;
    Ok(CleanupOutcome {
        domain: Some(rep.domain),
        checks,
        ball_cells: rep.ball_cells,
        ball_center: rep.ball_center,
        perimeter_before: rep.perimeter_before,
        perimeter_after: rep.perimeter_after,
        perimeter_flag: rep.perimeter_flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Axis;
    use crate::pde::solve_torsion;
    use crate::surgery::constants::{ConstantsOptions, ConstantsRequest, Mode};

    fn rect(a0: i64, a1: i64, b0: i64, b1: i64) -> impl Iterator<Item = (i64, i64)> {
        (a0..a1).flat_map(move |a| (b0..b1).map(move |b| (a, b)))
    }

    fn constants(h: f64, factor: f64) -> SurgeryConstants {
        let req = ConstantsRequest {
            k_threshold: 100.0,
            k: 1,
            p_bound: 8.0,
            volume: 1.0,
            h,
            extent: 1.0,
            dim: 2,
        };
        let opts = ConstantsOptions {
            mode: Mode::Practical(factor),
            ..Default::default()
        };
        SurgeryConstants::derive(&req, &opts).unwrap()
    }

    #[test]
    fn strip_wider_than_r0_is_rejected() {
        let h = 1.0 / 64.0;
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], rect(0, 64, 0, 64)).unwrap();
        let f = solve_torsion(&d, &TorsionOptions::default()).unwrap();
        let k = constants(h, 100.0);
        let s = Strip::new(Axis::X, 0.5, 2.0 * k.r0).unwrap();
        assert!(strip_removal_test(&f, &s, &k).is_err());
        let s = Strip::new(Axis::X, 0.5, k.r0).unwrap();
        let t = strip_removal_test(&f, &s, &k).unwrap();
        assert!(!t.passes);
    }

    #[test]
    fn far_thin_component_is_replaced() {
        let h = 1.0 / 128.0;
        // a fat block and a detached thin bar far to the right
        let cells = rect(0, 60, 0, 60).chain(rect(100, 126, 0, 2));
        let d = GridDomain::from_lattice_cells(h, [0.0, 0.0], cells).unwrap();
        let f = solve_torsion(&d, &TorsionOptions::default()).unwrap();
        let k = constants(h, 1000.0);
        let region = crate::surgery::plan::detect_active_region(&f, k.c0r0, k.r0, Axis::X);
        assert!(!region.contains(d.center_coord(Axis::X, 110)));
        let out = component_cleanup(&d, &region, &f, &k, ReplacementShape::Disk).unwrap();
        assert_eq!(out.replaced(), 1);
        let nd = out.domain.unwrap();
        assert_eq!(nd.cell_count(), d.cell_count());
        assert!(out.perimeter_after < out.perimeter_before);
    }
}
