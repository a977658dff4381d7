//! Domain surgery: cutting thin parts off a set while keeping its low
//! Dirichlet eigenvalues from increasing, and replacing far pieces by a ball.
//!
//! [`strip_surgery`] runs the full pipeline on a unit-measure domain:
//! constants, active region, cut plan, cut depth, component cleanup and
//! rescaling, followed by the checks of its guarantees. [`bounded_surgery`]
//! instead lowers the penalized torsion energy `E + c|.|` by discrete
//! truncation moves.

mod cleanup;
mod constants;
mod descent;
mod plan;
mod strip;

use serde::{Deserialize, Serialize};

use crate::domain::{diam_e, diameter, measure, perimeter, Axis, GridDomain, ReplacementShape};
use crate::error::Result;
use crate::pde::{eigenvalues, EigenOptions, Spectrum, TorsionOptions};

pub use cleanup::{
    component_cleanup, penalized_energy, strip_removal_effect, strip_removal_test, CleanupOutcome,
    ComponentCheck, RemovalEffect, StripTest,
};
pub use constants::{
    choose_c, choose_cut_constants, choose_strip_constants, mass_cap, slide_length,
    torsion_mass_constant, volume_floor, CBounds, ConstantsOptions, ConstantsRequest,
    ConstantsTrace, CutConstants, KPower, Mode, SurgeryConstants,
};
pub use descent::{
    bounded_surgery, subsolution_truncate, verify_choicec, BoundedOutcome, BoundedReport,
    DescentMove, DescentOptions, DescentOutcome, MoveKind,
};
pub use plan::{
    coarea_defect, detect_active_region, plan_cuts, select_cut_depth, slab_profile, ActiveRegion,
    CutAccount, CutSite, DepthChoice, DepthSample, SlabSample, SlabStats, SurgeryPlan,
};
pub use strip::{diameter_bound, strip_surgery, SurgeryOutcome, SurgeryReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryConfig {
    pub constants: ConstantsOptions,
    /// Direction orthogonal to the cutting strips.
    pub axis: Axis,
    pub shape: ReplacementShape,
    pub torsion: TorsionOptions,
    pub eigen: EigenOptions,
    /// Allowed relative increase of an eigenvalue below `K`.
    pub eigen_slack: f64,
    /// Depth scan step; `None` means the lattice spacing.
    pub t_step: Option<f64>,
    /// Raster allowance on the directional diameter bound, in cells.
    pub diameter_slack_cells: f64,
    pub descent: DescentOptions,
    pub domain_id: Option<String>,
}

impl Default for SurgeryConfig {
    fn default() -> Self {
        SurgeryConfig {
            constants: ConstantsOptions::default(),
            axis: Axis::X,
            shape: ReplacementShape::Disk,
            torsion: TorsionOptions::default(),
            eigen: EigenOptions::default(),
            eigen_slack: 1e-3,
            t_step: None,
            diameter_slack_cells: 2.0,
            descent: DescentOptions::default(),
            domain_id: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Nothing was removed or replaced.
    NoOp,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::NoOp => "noop",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub h: f64,
    pub cells: usize,
    pub measure: f64,
    pub perimeter: f64,
    /// Width along the surgery axis.
    pub directional_diameter: f64,
    pub diameter: f64,
    pub eigenvalues: Vec<f64>,
    pub eigen_rel_tol: f64,
}

impl Measurements {
    pub fn with_spectrum(d: &GridDomain, axis: Axis, s: &Spectrum) -> Self {
        Measurements {
            h: d.h(),
            cells: d.cell_count(),
            measure: measure(d),
            perimeter: perimeter(d),
            directional_diameter: diam_e(d, axis),
            diameter: diameter(d),
            eigenvalues: s.eigenvalues.clone(),
            eigen_rel_tol: s.rel_tol,
        }
    }

    pub fn compute(d: &GridDomain, axis: Axis, k: usize, opts: &EigenOptions) -> Result<Self> {
        let s = eigenvalues(d, k.min(d.cell_count()), opts)?;
        Ok(Measurements::with_spectrum(d, axis, &s))
    }
}
