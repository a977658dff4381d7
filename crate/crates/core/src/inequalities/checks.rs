//! Checkers. Each takes precomputed torsion fields and spectra where possible
//! so that a batch run solves every problem once.

use serde::{Deserialize, Serialize};

use super::constants::{
    berezin_li_yau_constant, omega, saint_venant_bound, talenti_bound, vdb_factor, ExpConstant,
    MTable,
};
use super::report::{default_rel_tol, IneqReport, ReportContext};
use crate::domain::{measure, GridDomain};
use crate::error::{Error, Result};
use crate::pde::{
    eigenvalues, gamma_distance_fields, solve_torsion, torsion_energy, EigenOptions, Spectrum,
    TorsionField, TorsionOptions,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Overrides [`default_rel_tol`].
    pub rel_tol: Option<f64>,
    pub exp: ExpConstant,
    /// Overrides the standard Berezin-Li-Yau constant.
    pub bly_constant: Option<f64>,
    pub torsion: TorsionOptions,
    pub eigen: EigenOptions,
    pub domain_id: Option<String>,
}

impl CheckOptions {
    pub fn tol(&self, h: f64) -> f64 {
        self.rel_tol.unwrap_or_else(|| default_rel_tol(h))
    }

    pub fn context(&self, h: f64) -> ReportContext {
        ReportContext::new(self.domain_id.as_deref(), h)
    }

    pub fn bly(&self, n: usize) -> f64 {
        self.bly_constant
            .unwrap_or_else(|| berezin_li_yau_constant(n))
    }
}

fn require(s: &Spectrum, k: usize) -> Result<()> {
    if s.k() < k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "check needs lambda_{k} but only {} eigenvalues were computed",
            s.k()
        )));
    }
    Ok(())
}

/// Integral of the torsion function against the value for the ball of the
/// same measure.
pub fn check_saint_venant(f: &TorsionField, opts: &CheckOptions) -> IneqReport {
    let d = f.domain();
    let h = d.h();
    let rhs = saint_venant_bound(measure(d), d.dim());
    IneqReport::upper(
        "saint_venant",
        f.integral(),
        rhs,
        opts.tol(h),
        opts.context(h),
    )
}

/// Sup of the torsion function against the value for the ball of the same
/// measure.
pub fn check_talenti(f: &TorsionField, opts: &CheckOptions) -> IneqReport {
    let d = f.domain();
    let h = d.h();
    let rhs = talenti_bound(measure(d), d.dim());
    IneqReport::upper("talenti", f.max(), rhs, opts.tol(h), opts.context(h))
}

/// `1/lambda_1 <= sup w <= (4 + 3 N log 2)/lambda_1`.
pub fn check_vdb(f: &TorsionField, s: &Spectrum, opts: &CheckOptions) -> Result<IneqReport> {
    require(s, 1)?;
    let d = f.domain();
    let h = d.h();
    let l1 = s.lambda(1);
    Ok(IneqReport::two_sided(
        "vdb",
        1.0 / l1,
        f.max(),
        vdb_factor(d.dim()) / l1,
        opts.tol(h),
        opts.context(h).with_k(1),
    ))
}

/// `C_N (k/|Omega|)^{2/N} <= lambda_k`, reported as `lhs = C_N (...)`.
pub fn check_berezin_li_yau(
    s: &Spectrum,
    volume: f64,
    k: usize,
    dim: usize,
    h: f64,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    require(s, k)?;
    let lhs = opts.bly(dim) * (k as f64 / volume).powf(2.0 / dim as f64);
    Ok(IneqReport::upper(
        "berezin_li_yau",
        lhs,
        s.lambda(k),
        opts.tol(h),
        opts.context(h).with_k(k),
    ))
}

/// `1 <= lambda_k / lambda_1 <= M_k`.
pub fn check_ratio_bound(
    s: &Spectrum,
    k: usize,
    table: &MTable,
    h: f64,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    require(s, k)?;
    let m = table.get(k)?;
    Ok(IneqReport::two_sided(
        "ratio_bound",
        1.0,
        s.lambda(k) / s.lambda(1),
        m,
        opts.tol(h),
        opts.context(h).with_k(k),
    ))
}

/// Everything needed about one member of a nested pair.
#[derive(Clone, Debug)]
pub struct SolvedDomain {
    pub torsion: TorsionField,
    pub spectrum: Spectrum,
}

impl SolvedDomain {
    pub fn solve(d: &GridDomain, k: usize, opts: &CheckOptions) -> Result<Self> {
        Ok(SolvedDomain {
            torsion: solve_torsion(d, &opts.torsion)?,
            spectrum: eigenvalues(d, k, &opts.eigen)?,
        })
    }
}

/// `|1/lambda_k(inner) - 1/lambda_k(outer)| <= 2 k^2 e lambda_k(outer)^{N/2} d_gamma`
/// for `inner` contained in `outer`.
pub fn check_gamma_stability(
    inner: &GridDomain,
    outer: &GridDomain,
    k: usize,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    if !inner.is_subset_of(outer)? {
        return Err(Error::NotSubset);
    }
    let a = SolvedDomain::solve(inner, k, opts)?;
    let b = SolvedDomain::solve(outer, k, opts)?;
    gamma_stability_report(&a, &b, k, opts)
}

/// [`check_gamma_stability`] on already solved domains.
pub fn gamma_stability_report(
    inner: &SolvedDomain,
    outer: &SolvedDomain,
    k: usize,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    require(&inner.spectrum, k)?;
    require(&outer.spectrum, k)?;
    let d = outer.torsion.domain();
    let dist = gamma_distance_fields(&inner.torsion, &outer.torsion)?;
    let (l_in, l_out) = (inner.spectrum.lambda(k), outer.spectrum.lambda(k));
    let lhs = (1.0 / l_in - 1.0 / l_out).abs();
    let kf = k as f64;
    let rhs = 2.0 * kf * kf * opts.exp.value() * l_out.powf(d.dim() as f64 / 2.0) * dist;
    Ok(IneqReport::upper(
        "gamma_stability",
        lhs,
        rhs,
        opts.tol(d.h()),
        opts.context(d.h()).with_k(k),
    ))
}

/// For nested sets the gamma distance equals `2 (E(inner) - E(outer))`.
/// Compared with an absolute allowance of `2 tol ||w_outer||_1`.
pub fn gamma_identity_report(
    inner: &TorsionField,
    outer: &TorsionField,
    solver_tol: f64,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    let dist = gamma_distance_fields(inner, outer)?;
    let ident = 2.0 * (torsion_energy(inner) - torsion_energy(outer));
    let h = outer.domain().h();
    Ok(IneqReport::upper(
        "gamma_identity",
        (dist - ident).abs(),
        2.0 * solver_tol * outer.integral(),
        0.0,
        opts.context(h),
    ))
}

/// Lower bound on the integral of `w` over a small ball around a point where
/// `w >= theta`: `theta omega_N delta^N / 2 <= int_{B_delta(x)} w`, valid
/// for `delta <= sqrt(theta (N + 2))`.
pub fn check_local_density(
    f: &TorsionField,
    x: [f64; 2],
    theta: f64,
    delta: f64,
    opts: &CheckOptions,
) -> IneqReport {
    let d = f.domain();
    let (h, n) = (d.h(), d.dim());
    let delta0 = density_radius(theta, n);
    let wx = d.locate(x).map_or(0.0, |(i, j)| f.value(i, j));
    let mut integral = 0.0;
    for (i, j) in d.occupied() {
        let c = d.cell_center(i, j);
        let (dx, dy) = (c[0] - x[0], c[1] - x[1]);
        if dx * dx + dy * dy <= delta * delta {
            integral += f.value(i, j);
        }
    }
    integral *= h.powi(n as i32);
    let lhs = theta * omega(n) * delta.powi(n as i32) / 2.0;
    let r = IneqReport::upper("density", lhs, integral, opts.tol(h), opts.context(h));
    if wx < theta || delta > delta0 || !(theta > 0.0) {
        r.unmet()
    } else {
        r
    }
}

/// Largest radius admitted by [`check_local_density`].
pub fn density_radius(theta: f64, n: usize) -> f64 {
    (theta * (n as f64 + 2.0)).sqrt()
}

/// `0 <= E(A) + c |A|` for a subset `A` on which the torsion function of the
/// enclosing set stays below `c0r0`.
pub fn check_positive_energy(
    outer: &TorsionField,
    a: &GridDomain,
    c: f64,
    c0r0: f64,
    opts: &CheckOptions,
) -> Result<IneqReport> {
    let d = outer.domain();
    let h = d.h();
    if a.is_empty() {
        return Ok(IneqReport::upper(
            "positive_energy",
            0.0,
            0.0,
            opts.tol(h),
            opts.context(h),
        ));
    }
    let (di, dj) = d.lattice_offset(a)?;
    let mut max_w = 0.0f64;
    for (i, j) in a.occupied() {
        let (p, q) = (i as i64 + di, j as i64 + dj);
        if p < 0 || q < 0 || !d.is_occupied(p as usize, q as usize) {
            return Err(Error::NotSubset);
        }
        max_w = max_w.max(outer.value(p as usize, q as usize));
    }
    let wa = solve_torsion(a, &opts.torsion)?;
    let value = torsion_energy(&wa) + c * measure(a);
    let r = IneqReport::upper("positive_energy", 0.0, value, opts.tol(h), opts.context(h));
    Ok(if max_w > c0r0 { r.unmet() } else { r })
}
