//! The strip surgery pipeline.

use serde::{Deserialize, Serialize};

use super::cleanup::{component_cleanup, CleanupOutcome};
use super::constants::{ConstantsRequest, Mode, SurgeryConstants};
use super::plan::{
    detect_active_region, plan_cuts_with, select_cut_depth_with, ActiveRegion, DepthChoice,
    SlabStats, SurgeryPlan,
};
use super::{Measurements, SurgeryConfig, Verdict};
use crate::domain::{cut_strips, extent, measure, perimeter, GridDomain, DIM};
use crate::error::{Error, Result};
use crate::inequalities::{omega, IneqReport, ReportContext};
use crate::pde::{eigenvalues, solve_torsion};

/// Bound on the width along the surgery axis of the output, given the
/// active region measure, its number of gaps and the constants.
pub fn diameter_bound(
    region_measure: f64,
    gaps: usize,
    r0: f64,
    l0: f64,
    p: usize,
    dim: usize,
) -> f64 {
    let n = gaps as f64;
    2.0 * (region_measure + n * (8.0 * r0 + 2.0 * l0) + 2.0 * r0 * (n + 2.0))
        + 2.0 * omega(dim).powf(-1.0 / dim as f64)
        + 4.0 * n * p as f64 * (4.0 * r0 + l0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryReport {
    pub domain_id: Option<String>,
    pub mode: Mode,
    /// The input did not have unit measure and was rescaled first.
    pub auto_normalized: bool,
    pub constants: SurgeryConstants,
    pub region: ActiveRegion,
    pub plan: SurgeryPlan,
    pub depth: DepthChoice,
    pub removed_cells: usize,
    pub cleanup: CleanupOutcome,
    /// Dilation applied after cutting to restore unit measure.
    pub rescale_factor: f64,
    pub before: Measurements,
    pub after: Measurements,
    pub diameter_bound: f64,
    /// [`SurgeryReport::diameter_bound`] times `(1 - m_hat)^{-1/N}`.
    pub diameter_bound_rescaled: f64,
    pub checks: Vec<IneqReport>,
    pub flags: Vec<String>,
    pub verdict: Verdict,
}

impl SurgeryReport {
    pub fn failures(&self) -> impl Iterator<Item = &IneqReport> {
        self.checks.iter().filter(|r| r.is_failure())
    }
}

#[derive(Clone, Debug)]
pub struct SurgeryOutcome {
    pub domain: GridDomain,
    pub report: SurgeryReport,
}

/// Cuts strips around the region where the torsion function is large,
/// replaces far components by a ball and rescales to unit measure.
///
/// `p_bound` defaults to the input perimeter. Inputs without unit measure are
/// normalized first and the report says so.
pub fn strip_surgery(
    d: &GridDomain,
    k_threshold: f64,
    k: usize,
    p_bound: Option<f64>,
    cfg: &SurgeryConfig,
) -> Result<SurgeryOutcome> {
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let axis = cfg.axis;
    let mut flags = Vec::new();
    let auto_normalized = (measure(d) - 1.0).abs() > 4.0 * f64::EPSILON;
    let input = if auto_normalized {
        log::info!("input measure {} rescaled to 1", measure(d));
        d.normalized()?
    } else {
        d.clone()
    };
    let h = input.h();
    let per = perimeter(&input);
    let p_bound = p_bound.unwrap_or(per);
    if per > p_bound * (1.0 + 1e-12) {
        flags.push("perimeter_above_bound".to_owned());
    }
    let req = ConstantsRequest {
        k_threshold,
        k,
        p_bound,
        volume: measure(&input),
        h,
        extent: extent(&input, axis).map_or(0.0, |(a, b)| b - a),
        dim: DIM,
    };
    let mut consts = SurgeryConstants::derive(&req, &cfg.constants)?;
    let field = solve_torsion(&input, &cfg.torsion)?;
    let spec_before = eigenvalues(&input, k, &cfg.eigen)?;
    consts.trace.lambda_multiplier =
        Some(spec_before.lambda(k) * measure(&input).powf(2.0 / DIM as f64));
    let before = Measurements::with_spectrum(&input, axis, &spec_before);

    let region = detect_active_region(&field, consts.c0r0, consts.r0, axis);
    let stats = SlabStats::new(&input, axis);
    let plan = plan_cuts_with(&stats, &region, &consts);
    if plan.mass_flag {
        flags.push("band_mass_above_threshold".to_owned());
    }
    let depth = select_cut_depth_with(&stats, input.cell_count(), &plan, cfg.t_step);
    if depth.flag {
        flags.push("cut_depth_perimeter".to_owned());
    }
    let cut = cut_strips(&input, &plan.strips(depth.t));
    if cut.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let removed_cells = input.cell_count() - cut.cell_count();
    // An empty active region leaves nothing to anchor the cleanup: no-op.
    let mut cleanup = if region.is_empty() {
        CleanupOutcome::identity(&cut)
    } else {
        component_cleanup(&cut, &region, &field, &consts, cfg.shape)?
    };
    if cleanup.perimeter_flag {
        flags.push("ball_perimeter".to_owned());
    }
    if cleanup.kept_flagged() > 0 {
        flags.push("component_kept".to_owned());
    }
    let cleaned = cleanup.domain.take().expect("cleanup returns a domain");
    let changed = removed_cells > 0 || cleanup.replaced() > 0;

    let (output, after, rescale_factor) = if changed {
        let out = cleaned.normalized()?;
        let factor = out.h() / cleaned.h();
        let spec = eigenvalues(&out, k, &cfg.eigen)?;
        let after = Measurements::with_spectrum(&out, axis, &spec);
        (out, after, factor)
    } else {
        (input.clone(), before.clone(), 1.0)
    };

    let gaps = region.intervals.len().saturating_sub(1);
    let dbound = diameter_bound(region.measure(), gaps, consts.r0, consts.l0, consts.p, DIM);
    let dbound_rescaled = dbound * (1.0 - consts.m_hat).powf(-1.0 / DIM as f64);

    let ctx = ReportContext::new(cfg.domain_id.as_deref(), output.h());
    let mut checks = vec![IneqReport::upper(
        "unit_measure",
        (after.measure - 1.0).abs(),
        2.0 * f64::EPSILON,
        0.0,
        ctx.clone(),
    )];
    let per_check = IneqReport::upper(
        "perimeter",
        after.perimeter,
        before.perimeter,
        1e-12,
        ctx.clone(),
    );
    checks.push(if depth.flag || plan.mass_flag || cleanup.perimeter_flag {
        per_check.unmet()
    } else {
        per_check
    });
    for i in 1..=k {
        let (lb, la) = (before.eigenvalues[i - 1], after.eigenvalues[i - 1]);
        let r = IneqReport::upper(
            &format!("eigenvalue_{i}"),
            la,
            lb,
            cfg.eigen_slack,
            ctx.with_k(i),
        );
        checks.push(if lb > k_threshold { r.unmet() } else { r });
    }
    checks.push(IneqReport::upper(
        "directional_diameter",
        after.directional_diameter,
        dbound + cfg.diameter_slack_cells * output.h(),
        0.0,
        ctx,
    ));

    let verdict = if checks.iter().any(IneqReport::is_failure) {
        Verdict::Fail
    } else if changed {
        Verdict::Pass
    } else {
        Verdict::NoOp
    };
    Ok(SurgeryOutcome {
        domain: output,
        report: SurgeryReport {
            domain_id: cfg.domain_id.clone(),
            mode: consts.mode,
            auto_normalized,
            constants: consts,
            region,
            plan,
            depth,
            removed_cells,
            cleanup,
            rescale_factor,
            before,
            after,
            diameter_bound: dbound,
            diameter_bound_rescaled: dbound_rescaled,
            checks,
            flags,
            verdict,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_only_bound_is_the_unit_ball_diameter() {
        assert_relative_eq!(diameter_bound(0.0, 0, 0.0, 0.0, 1, 2), 2.0 / PI.sqrt());
        let d = diameter_bound(1.0, 1, 0.01, 0.1, 3, 2);
        let expect = 2.0 * (1.0 + 0.28 + 0.06) + 2.0 / PI.sqrt() + 12.0 * 0.14;
        assert_relative_eq!(d, expect, max_relative = 1e-14);
    }
}
