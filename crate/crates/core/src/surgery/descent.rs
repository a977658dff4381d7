//! Discrete descent on `E + c|.|` and the bounded surgery built on it.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::{choose_c, volume_floor, CBounds, Mode};
use super::{Measurements, SurgeryConfig, Verdict};
use crate::domain::{extent, measure, Axis, GridDomain, DIM};
use crate::error::{Error, Result};
use crate::inequalities::{IneqReport, MTable, ReportContext};
use crate::pde::{
    eigenvalues, solve_torsion, torsion_energy, Spectrum, TorsionField, TorsionOptions,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_moves: usize,
    /// Sublevel thresholds `sup w * 2^{-j}` for `j = 1..=levels`.
    pub levels: usize,
    /// Width of the boundary slab moves; `None` means `4h`.
    pub slab_width: Option<f64>,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_moves: 40,
            levels: 12,
            slab_width: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoveKind {
    /// Drop the cells where `w < threshold`.
    Sublevel { level: usize, threshold: f64 },
    /// Drop the cells within `width` of one end of the extent along `axis`.
    Slab { axis: Axis, upper: bool, width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentMove {
    pub step: usize,
    pub kind: MoveKind,
    pub energy_before: f64,
    pub energy_after: f64,
    pub removed_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentOutcome {
    #[serde(skip)]
    pub domain: Option<GridDomain>,
    pub c: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub moves: Vec<DescentMove>,
    /// Stopped at the move cap with an improving move still available.
    pub hit_cap: bool,
    pub input_sup: f64,
    pub output_sup: f64,
    pub input_measure: f64,
    pub output_measure: f64,
}

impl DescentOutcome {
    /// Every accepted move strictly lowered the penalized energy.
    pub fn is_monotone(&self) -> bool {
        self.moves.iter().all(|m| m.energy_after < m.energy_before)
            && self
                .moves
                .windows(2)
                .all(|w| w[1].energy_before == w[0].energy_after)
    }
}

fn penalized(f: &TorsionField, c: f64) -> f64 {
    torsion_energy(f) + c * measure(f.domain())
}

fn candidates(f: &TorsionField, opts: &DescentOptions) -> Vec<(MoveKind, GridDomain)> {
    let d = f.domain();
    let sup = f.max();
    let mut out: Vec<(MoveKind, GridDomain)> = Vec::new();
    let mut seen = Vec::new();
    let mut push = |kind: MoveKind, cand: GridDomain, out: &mut Vec<(MoveKind, GridDomain)>| {
        let n = cand.cell_count();
        if n == 0 || n == d.cell_count() || seen.contains(&(n, cand.cells().to_vec())) {
            return;
        }
        seen.push((n, cand.cells().to_vec()));
        out.push((kind, cand));
    };
    for level in 1..=opts.levels {
        let threshold = sup * 0.5f64.powi(level as i32);
        let cand = d.retain(|i, j| f.value(i, j) >= threshold);
        push(MoveKind::Sublevel { level, threshold }, cand, &mut out);
    }
    let width = opts.slab_width.unwrap_or(4.0 * d.h());
    for axis in Axis::ALL {
        let Some((lo, hi)) = extent(d, axis) else {
            continue;
        };
        for upper in [false, true] {
            let cand = d.retain(|i, j| {
                let x = d.center_coord(axis, if axis == Axis::X { i } else { j });
                if upper {
                    x < hi - width
                } else {
                    x > lo + width
                }
            });
            push(MoveKind::Slab { axis, upper, width }, cand, &mut out);
        }
    }
    out
}

/// Greedy descent on `E + c|.|` over sublevel-set and boundary-slab
/// removals. A move is accepted only if it strictly lowers the value; the
/// best candidate is taken at every step.
pub fn subsolution_truncate(
    d: &GridDomain,
    c: f64,
    opts: &DescentOptions,
    torsion: &TorsionOptions,
) -> Result<DescentOutcome> {
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut field = solve_torsion(d, torsion)?;
    let mut value = penalized(&field, c);
    let initial_energy = value;
    let input_sup = field.max();
    let mut moves = Vec::new();
    let mut hit_cap = false;
    loop {
        let cands = candidates(&field, opts);
        let evaluated: Vec<(MoveKind, TorsionField, f64)> = cands
            .into_par_iter()
            .map(|(kind, cand)| {
                let f = solve_torsion(&cand, torsion)?;
                let v = penalized(&f, c);
                Ok((kind, f, v))
            })
            .collect::<Result<_>>()?;
        let best = evaluated
            .into_iter()
            .filter(|(_, _, v)| *v < value - 1e-12 * value.abs())
            .min_by(|a, b| a.2.total_cmp(&b.2));
        let Some((kind, f, v)) = best else { break };
        if moves.len() == opts.max_moves {
            hit_cap = true;
            break;
        }
        log::debug!("descent step {}: {kind:?} {value:e} -> {v:e}", moves.len());
        moves.push(DescentMove {
            step: moves.len(),
            kind,
            energy_before: value,
            energy_after: v,
            removed_cells: field.domain().cell_count() - f.domain().cell_count(),
        });
        field = f;
        value = v;
    }
    Ok(DescentOutcome {
        domain: Some(field.domain().clone()),
        c,
        initial_energy,
        final_energy: value,
        moves,
        hit_cap,
        input_sup,
        output_sup: field.max(),
        input_measure: measure(d),
        output_measure: measure(field.domain()),
    })
}

/// Compares the spectra of `after` inside `before`: scale-invariant
/// monotonicity `lambda_i(after)|after|^{2/N} <= lambda_i(before)|before|^{2/N}`
/// and the two-sided bound
/// `lambda_i(before) <= lambda_i(after) <= (8 + 6N log 2) M_i lambda_i(before)`.
///
/// Indices with `lambda_i(before) > K` are reported as not applicable.
#[allow(clippy::too_many_arguments)]
pub fn verify_choicec(
    before: &GridDomain,
    before_spectrum: &Spectrum,
    after: &GridDomain,
    after_spectrum: &Spectrum,
    k_threshold: f64,
    table: &MTable,
    rel_tol: f64,
    ctx: &ReportContext,
) -> Result<Vec<IneqReport>> {
    if !after.is_subset_of(before)? {
        return Err(Error::NotSubset);
    }
    let k = before_spectrum.k().min(after_spectrum.k());
    let n = DIM as f64;
    let (vb, va) = (measure(before).powf(2.0 / n), measure(after).powf(2.0 / n));
    let mut out = Vec::with_capacity(2 * k);
    for i in 1..=k {
        let (lb, la) = (before_spectrum.lambda(i), after_spectrum.lambda(i));
        let applies = lb <= k_threshold;
        let ctx = ctx.with_k(i);
        let r = IneqReport::upper(
            &format!("rescaled_monotone_{i}"),
            la * va,
            lb * vb,
            rel_tol,
            ctx.clone(),
        );
        out.push(if applies { r } else { r.unmet() });
        let upper = (8.0 + 6.0 * n * LN_2) * table.get(i)? * lb;
        let r = IneqReport::two_sided(
            &format!("eigenvalue_sandwich_{i}"),
            lb,
            la,
            upper,
            rel_tol,
            ctx,
        );
        out.push(if applies { r } else { r.unmet() });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedReport {
    pub domain_id: Option<String>,
    pub mode: Mode,
    pub auto_normalized: bool,
    #[serde(rename = "K")]
    pub k_threshold: f64,
    pub k: usize,
    pub c_bounds: CBounds,
    pub c: f64,
    /// Smallest admissible measure of the truncated set.
    pub beta: f64,
    pub descent: DescentOutcome,
    pub before: Measurements,
    /// The truncated set before rescaling.
    pub truncated: Measurements,
    /// The truncated set rescaled to unit measure.
    pub after: Measurements,
    pub checks: Vec<IneqReport>,
    pub flags: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct BoundedOutcome {
    pub domain: GridDomain,
    pub report: BoundedReport,
}

/// Truncates a domain by descent on `E + c|.|`, then rescales to unit
/// measure. The checks cover the eigenvalue bounds of the truncation, the
/// measure floor `beta`, the sup floor of the torsion function and monotone
/// descent.
pub fn bounded_surgery(
    d: &GridDomain,
    k_threshold: f64,
    k: usize,
    cfg: &SurgeryConfig,
) -> Result<BoundedOutcome> {
    if d.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let auto_normalized = (measure(d) - 1.0).abs() > 4.0 * f64::EPSILON;
    let input = if auto_normalized {
        d.normalized()?
    } else {
        d.clone()
    };
    let opts = &cfg.constants;
    let volume = measure(&input);
    let c_bounds = choose_c(
        k_threshold,
        k,
        volume,
        DIM,
        &opts.table,
        opts.k_power,
        opts.exp,
    )?;
    let c = c_bounds.faithful * opts.mode.factor();
    let beta = volume_floor(k_threshold, volume, DIM);
    let axis = cfg.axis;

    let spec_before = eigenvalues(&input, k, &cfg.eigen)?;
    let before = Measurements::with_spectrum(&input, axis, &spec_before);
    let mut descent = subsolution_truncate(&input, c, &cfg.descent, &cfg.torsion)?;
    let truncated_domain = descent.domain.take().expect("descent returns a domain");
    let changed = !descent.moves.is_empty();

    let mut flags = Vec::new();
    if descent.hit_cap {
        flags.push("descent_move_cap".to_owned());
    }
    let ctx = ReportContext::new(cfg.domain_id.as_deref(), input.h());
    let (output, truncated, after, mut checks) = if changed {
        let spec_trunc = eigenvalues(&truncated_domain, k, &cfg.eigen)?;
        let truncated = Measurements::with_spectrum(&truncated_domain, axis, &spec_trunc);
        let checks = verify_choicec(
            &input,
            &spec_before,
            &truncated_domain,
            &spec_trunc,
            k_threshold,
            &opts.table,
            cfg.eigen_slack,
            &ctx,
        )?;
        let out = truncated_domain.normalized()?;
        let t = out.h() / truncated_domain.h();
        let after = Measurements::with_spectrum(&out, axis, &spec_trunc.rescaled(t));
        (out, truncated, after, checks)
    } else {
        (input.clone(), before.clone(), before.clone(), Vec::new())
    };

    // both floors assume lambda_k of the input is at most K
    let hypothesis = spec_before.lambda(k) <= k_threshold;
    if !hypothesis {
        flags.push("spectrum_above_threshold".to_owned());
    }
    let scoped = |r: IneqReport| if hypothesis { r } else { r.unmet() };
    checks.push(scoped(IneqReport::upper(
        "measure_floor",
        beta,
        truncated.measure,
        0.0,
        ctx.clone(),
    )));
    checks.push(scoped(IneqReport::upper(
        "sup_floor",
        0.5 * descent.input_sup,
        descent.output_sup,
        1e-9,
        ctx.clone(),
    )));
    checks.push(IneqReport::upper(
        "monotone_descent",
        if descent.is_monotone() { 0.0 } else { 1.0 },
        0.0,
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
    Ok(BoundedOutcome {
        domain: output,
        report: BoundedReport {
            domain_id: cfg.domain_id.clone(),
            mode: opts.mode,
            auto_normalized,
            k_threshold,
            k,
            c_bounds,
            c,
            beta,
            descent,
            before,
            truncated,
            after,
            checks,
            flags,
            verdict,
        },
    })
}
