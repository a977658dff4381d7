//! Selection of the energy penalty `c` and the derived strip and cut
//! constants.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{lambda1_unit_ball, omega, ExpConstant, MTable};

/// Faithful constants, or `c` multiplied by a user factor so that the strip
/// test can succeed on desk-scale rasters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    Faithful,
    Practical(f64),
}

impl Mode {
    pub fn factor(self) -> f64 {
        match self {
            Mode::Faithful => 1.0,
            Mode::Practical(f) => f,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Faithful => write!(f, "faithful"),
            Mode::Practical(x) => write!(f, "practical:{x}"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "faithful" {
            return Ok(Mode::Faithful);
        }
        if let Some(f) = s.strip_prefix("practical:") {
            let f: f64 = f
                .parse()
                .map_err(|_| Error::Config(format!("bad practical factor in `{s}`")))?;
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!(
                    "practical factor must be positive, got {f}"
                )));
            }
            return Ok(if f == 1.0 {
                Mode::Faithful
            } else {
                Mode::Practical(f)
            });
        }
        Err(Error::Config(format!(
            "mode must be `faithful` or `practical:<factor>`, got `{s}`"
        )))
    }
}

/// Power of `k` in the eigenvalue-ratio bound on `c`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KPower {
    /// `k^2` appears twice in the denominator.
    #[default]
    Quartic,
    /// A single `k^2`.
    Squared,
}

impl std::str::FromStr for KPower {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" | "quartic" => Ok(KPower::Quartic),
            "2" | "squared" => Ok(KPower::Squared),
            _ => Err(Error::Config(format!("k power must be 2 or 4, got `{s}`"))),
        }
    }
}

/// `(2N)^{(N+2)/2} omega_N / (N (N+2))`.
pub fn torsion_mass_constant(n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * nf).powf((nf + 2.0) / 2.0) * omega(n) / (nf * (nf + 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CBounds {
    /// Keeps `E + c|.|` of the input negative.
    pub negative_energy: f64,
    /// Keeps the sup of the torsion function from halving.
    pub sup_floor: f64,
    /// Eigenvalue-ratio bound.
    pub ratio: f64,
    /// Gamma-stability alternative with `K` in place of `lambda_k`.
    pub gamma: f64,
    /// Name of the smallest bound.
    pub active: String,
    /// Minimum of the four before the mode factor.
    pub faithful: f64,
}

/// The penalty `c`: minimum of the four admissible upper bounds, times the
/// mode factor.
pub fn choose_c(
    k_threshold: f64,
    k: usize,
    volume: f64,
    dim: usize,
    table: &MTable,
    k_power: KPower,
    exp: ExpConstant,
) -> Result<CBounds> {
    if !(k_threshold > 0.0 && volume > 0.0) || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "need K > 0, k >= 1 and positive volume (got K={k_threshold}, k={k}, volume={volume})"
        )));
    }
    let n = dim as f64;
    let big_k = k_threshold;
    let cn = torsion_mass_constant(dim);
    let negative_energy = cn / (2.0 * volume * (2.0 * big_k).powf((n + 2.0) / 2.0));
    let sup_floor = cn * big_k.powf(-(n + 2.0) / 2.0);
    let kf = k as f64;
    let kk = match k_power {
        KPower::Quartic => kf.powi(4),
        KPower::Squared => kf * kf,
    };
    let e = exp.value();
    let ratio = lambda1_unit_ball(dim)
        / (2.0 * table.get(k)? * kk * (8.0 + 6.0 * n * LN_2) * e * big_k.powf(n / 2.0 + 2.0));
    let gamma = 1.0 / (8.0 * kf * kf * e * big_k.powf(n / 2.0 + 1.0));
    let named = [
        ("negative_energy", negative_energy),
        ("sup_floor", sup_floor),
        ("ratio", ratio),
        ("gamma", gamma),
    ];
    let (active, faithful) =
        named.iter().copied().fold(
            ("", f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        );
    Ok(CBounds {
        negative_energy,
        sup_floor,
        ratio,
        gamma,
        active: active.to_owned(),
        faithful,
    })
}

/// Strip constants with `C0 r0 <= min(c/2, 1/(2K))`.
///
/// `r0` is the requested width if given (it must be at least `4h`), else the
/// larger of `4h` and `fraction * extent`.
pub fn choose_strip_constants(
    c: f64,
    k_threshold: f64,
    h: f64,
    requested_r0: Option<f64>,
    fraction: f64,
    extent: f64,
) -> Result<(f64, f64)> {
    let min_r0 = 4.0 * h;
    let r0 = match requested_r0 {
        Some(r) if r < min_r0 => return Err(Error::GridTooCoarse { r0: r, min: min_r0 }),
        Some(r) => r,
        None => min_r0.max(fraction * extent),
    };
    let target = (c / 2.0).min(1.0 / (2.0 * k_threshold));
    let mut c0 = target / r0;
    while c0 * r0 > target {
        c0 = f64::from_bits(c0.to_bits() - 1);
    }
    Ok((c0, r0))
}

/// `(1 - m)^{(N-1)/N} - 1 + m^{(N-1)/N} / (2P)`, nonnegative for small `m`.
fn perimeter_margin(m: f64, p: f64, dim: usize) -> f64 {
    let e = (dim as f64 - 1.0) / dim as f64;
    (1.0 - m).powf(e) - 1.0 + m.powf(e) / (2.0 * p)
}

/// Largest mass fraction keeping the rescaling factor on eigenvalues at most 2:
/// `(1 - m)^{2/N} >= 1/2`.
pub fn mass_cap(dim: usize) -> f64 {
    1.0 - 2f64.powf(-(dim as f64) / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutConstants {
    pub m_hat: f64,
    pub l0: f64,
    pub p: usize,
    /// Whether the mass cap rather than the perimeter condition set `m_hat`.
    pub capped: bool,
}

/// Mass threshold, slide length and slide count for perimeter bound `P`.
pub fn choose_cut_constants(p_bound: f64, dim: usize) -> Result<CutConstants> {
    if !(p_bound > 0.0 && p_bound.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "perimeter bound must be positive, got {p_bound}"
        )));
    }
    let cap = mass_cap(dim);
    // first sign change of the margin on a fine grid, then bisection
    const SAMPLES: usize = 1 << 14;
    let mut lo = 0.0;
    let mut hi = None;
    for s in 1..=SAMPLES {
        let m = cap * s as f64 / SAMPLES as f64;
        if perimeter_margin(m, p_bound, dim) < 0.0 {
            hi = Some(m);
            break;
        }
        lo = m;
    }
    let (m_hat, capped) = match hi {
        None => (cap, true),
        Some(mut hi) => {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if perimeter_margin(mid, p_bound, dim) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo, false)
        }
    };
    if !(m_hat > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "no admissible mass threshold for perimeter bound {p_bound}"
        )));
    }
    Ok(CutConstants {
        m_hat,
        l0: slide_length(m_hat, dim),
        p: (1.0 / m_hat).ceil() as usize,
        capped,
    })
}

/// `1.01 * 4N m^{1/N} / (2 omega_N^{1/N} - 1)`.
pub fn slide_length(m_hat: f64, dim: usize) -> f64 {
    1.01 * min_slide_length(m_hat, dim)
}

fn min_slide_length(m_hat: f64, dim: usize) -> f64 {
    let n = dim as f64;
    4.0 * n * m_hat.powf(1.0 / n) / (2.0 * omega(dim).powf(1.0 / n) - 1.0)
}

/// `omega_N (N/K)^{N/2} * volume`.
pub fn volume_floor(k_threshold: f64, volume: f64, dim: usize) -> f64 {
    let n = dim as f64;
    omega(dim) * (n / k_threshold).powf(n / 2.0) * volume
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryConstants {
    pub dim: usize,
    #[serde(rename = "K")]
    pub k_threshold: f64,
    pub k: usize,
    #[serde(rename = "P")]
    pub p_bound: f64,
    pub volume: f64,
    pub mode: Mode,
    pub c: f64,
    pub c0: f64,
    pub r0: f64,
    /// `C0 * r0`, the strip-test threshold.
    pub c0r0: f64,
    pub l0: f64,
    pub m_hat: f64,
    pub beta: f64,
    pub p: usize,
    pub trace: ConstantsTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTrace {
    pub c_bounds: CBounds,
    /// `c/2` or `1/(2K)`, whichever limits `C0 r0`.
    pub strip_branch: String,
    pub m_hat_capped: bool,
    /// `lambda_k(input) |input|^{2/N}`, once known.
    pub lambda_multiplier: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRequest {
    pub k_threshold: f64,
    pub k: usize,
    pub p_bound: f64,
    pub volume: f64,
    pub h: f64,
    /// Window extent used with `r0_fraction`.
    pub extent: f64,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsOptions {
    pub mode: Mode,
    pub k_power: KPower,
    pub exp: ExpConstant,
    pub table: MTable,
    pub r0: Option<f64>,
    pub r0_fraction: f64,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        ConstantsOptions {
            mode: Mode::Faithful,
            k_power: KPower::Quartic,
            exp: ExpConstant::InvFourPi,
            table: MTable::default(),
            r0: None,
            r0_fraction: 0.0,
        }
    }
}

impl SurgeryConstants {
    pub fn derive(req: &ConstantsRequest, opts: &ConstantsOptions) -> Result<Self> {
        let bounds = choose_c(
            req.k_threshold,
            req.k,
            req.volume,
            req.dim,
            &opts.table,
            opts.k_power,
            opts.exp,
        )?;
        let c = bounds.faithful * opts.mode.factor();
        let (c0, r0) = choose_strip_constants(
            c,
            req.k_threshold,
            req.h,
            opts.r0,
            opts.r0_fraction,
            req.extent,
        )?;
        let cut = choose_cut_constants(req.p_bound, req.dim)?;
        let strip_branch = if c / 2.0 <= 1.0 / (2.0 * req.k_threshold) {
            "c/2"
        } else {
            "1/(2K)"
        };
        let out = SurgeryConstants {
            dim: req.dim,
            k_threshold: req.k_threshold,
            k: req.k,
            p_bound: req.p_bound,
            volume: req.volume,
            mode: opts.mode,
            c,
            c0,
            r0,
            c0r0: c0 * r0,
            l0: cut.l0,
            m_hat: cut.m_hat,
            beta: volume_floor(req.k_threshold, req.volume, req.dim),
            p: cut.p,
            trace: ConstantsTrace {
                c_bounds: bounds,
                strip_branch: strip_branch.into(),
                m_hat_capped: cut.capped,
                lambda_multiplier: None,
            },
        };
        out.check_invariants()?;
        Ok(out)
    }

    /// Re-asserts the defining inequalities.
    pub fn check_invariants(&self) -> Result<()> {
        let strip_cap = (self.c / 2.0).min(1.0 / (2.0 * self.k_threshold));
        let ok = self.c > 0.0
            && self.c0 > 0.0
            && self.r0 > 0.0
            && self.c0r0 <= strip_cap
            && self.l0 > min_slide_length(self.m_hat, self.dim)
            && self.m_hat > 0.0
            && self.m_hat <= mass_cap(self.dim)
            && perimeter_margin(self.m_hat, self.p_bound, self.dim) >= 0.0
            && self.beta > 0.0
            && self.p as f64 >= 1.0 / self.m_hat;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "surgery constants violate their invariants: {self:?}"
            )))
        }
    }
}
