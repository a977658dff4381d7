//! Dimensional constants.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First positive zero of `J_0`.
pub const J0_1: f64 = 2.404_825_557_695_773;
/// First positive zero of `J_1`.
pub const J1_1: f64 = 3.831_705_970_207_512;
/// First positive zero of `J_{3/2}`.
pub const J3HALF_1: f64 = 4.493_409_457_909_064;

/// Volume of the unit ball in dimension `n` (1, 2 or 3).
pub fn omega(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("dimension {n} is not supported"),
    }
}

/// First zeros `(j_{n/2-1,1}, j_{n/2,1})`.
fn bessel_zeros(n: usize) -> (f64, f64) {
    match n {
        // j_{-1/2,1} = pi/2, j_{1/2,1} = pi
        1 => (PI / 2.0, PI),
        2 => (J0_1, J1_1),
        3 => (PI, J3HALF_1),
        _ => panic!("dimension {n} is not supported"),
    }
}

/// First Dirichlet eigenvalue of the ball of unit measure.
pub fn lambda1_unit_ball(n: usize) -> f64 {
    let j = bessel_zeros(n).0;
    omega(n).powf(2.0 / n as f64) * j * j
}

/// `lambda_2 / lambda_1` of a ball.
pub fn ball_ratio(n: usize) -> f64 {
    let (a, b) = bessel_zeros(n);
    (b / a).powi(2)
}

/// Weyl-type constant in `lambda_k >= C (k / |Omega|)^{2/n}`.
pub fn berezin_li_yau_constant(n: usize) -> f64 {
    let nf = n as f64;
    nf / (nf + 2.0) * 4.0 * PI * PI * omega(n).powf(-2.0 / nf)
}

/// Upper factor `4 + 3 n log 2` relating the sup of the torsion function to
/// `1 / lambda_1`.
pub fn vdb_factor(n: usize) -> f64 {
    4.0 + 3.0 * n as f64 * LN_2
}

/// Largest possible integral of the torsion function over sets of the given
/// measure (attained by the ball).
pub fn saint_venant_bound(volume: f64, n: usize) -> f64 {
    let nf = n as f64;
    volume.powf((nf + 2.0) / nf) * omega(n).powf(-2.0 / nf) / (nf * (nf + 2.0))
}

/// Largest possible sup of the torsion function over sets of the given measure.
pub fn talenti_bound(volume: f64, n: usize) -> f64 {
    let nf = n as f64;
    (volume / omega(n)).powf(2.0 / nf) / (2.0 * nf)
}

/// Number of eigenvalues that can lie below `k_threshold` on a set of the
/// given measure.
pub fn max_index_below(k_threshold: f64, volume: f64, n: usize, bly: f64) -> usize {
    if k_threshold <= 0.0 {
        return 0;
    }
    ((k_threshold / bly).powf(n as f64 / 2.0) * volume).floor() as usize
}

/// Reading of the exponential factor in the eigenvalue stability estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpConstant {
    /// `exp(1 / (4 pi))`.
    #[default]
    InvFourPi,
    /// `exp(1/4) * pi`.
    QuarterTimesPi,
}

impl ExpConstant {
    pub fn value(self) -> f64 {
        match self {
            ExpConstant::InvFourPi => (1.0 / (4.0 * PI)).exp(),
            ExpConstant::QuarterTimesPi => 0.25f64.exp() * PI,
        }
    }
}

impl std::str::FromStr for ExpConstant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inv-four-pi" | "inv4pi" => Ok(ExpConstant::InvFourPi),
            "quarter-pi" | "quarter-times-pi" => Ok(ExpConstant::QuarterTimesPi),
            _ => Err(Error::Config(format!("unknown exponential constant `{s}`"))),
        }
    }
}

/// Upper bounds `M_k >= lambda_k / lambda_1` valid for every domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MTable {
    pub dim: usize,
    pub entries: BTreeMap<usize, f64>,
    /// Fill missing `k >= 3` with `(1 + 4/N) (k - 1)^{2/N}`.
    pub cheng_yang: bool,
}

impl MTable {
    /// `M_1 = 1` and `M_2` from the ball, nothing else.
    pub fn ball_ratio_only(dim: usize) -> Self {
        let entries = BTreeMap::from([(1, 1.0), (2, ball_ratio(dim))]);
        MTable {
            dim,
            entries,
            cheng_yang: false,
        }
    }

    /// [`MTable::ball_ratio_only`] plus the general bound for `k >= 3`.
    pub fn with_cheng_yang(dim: usize) -> Self {
        MTable {
            cheng_yang: true,
            ..MTable::ball_ratio_only(dim)
        }
    }

    pub fn set(&mut self, k: usize, value: f64) -> &mut Self {
        self.entries.insert(k, value);
        self
    }

    pub fn get(&self, k: usize) -> Result<f64> {
        if let Some(&m) = self.entries.get(&k) {
            return Ok(m);
        }
        if self.cheng_yang && k >= 2 {
            let n = self.dim as f64;
            return Ok((1.0 + 4.0 / n) * ((k - 1) as f64).powf(2.0 / n));
        }
        Err(Error::MissingRatioBound(k))
    }

    /// Parses `k:value` pairs separated by commas, e.g. `3:5.2,4:7`.
    pub fn parse_entries(&mut self, s: &str) -> Result<()> {
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("ratio bound `{part}` is not `k:value`")))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad index in `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad value in `{part}`")))?;
            if k == 0 || !(v >= 1.0) {
                return Err(Error::Config(format!("ratio bound `{part}` out of range")));
            }
            self.set(k, v);
        }
        Ok(())
    }
}

impl Default for MTable {
    fn default() -> Self {
        MTable::with_cheng_yang(2)
    }
}
