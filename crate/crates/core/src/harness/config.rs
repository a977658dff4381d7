//! Run configuration shared by the batch runner and the command line.
//!
//! The text format is one `key = value` pair per line with `#` comments. Keys
//! are the long flag names of the command line (`k`, `K`, `P`, `h`, `seed`,
//! `mode`, `out`, ...).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{Axis, ReplacementShape};
use crate::error::{Error, Result};
use crate::inequalities::{CheckOptions, ExpConstant, MTable};
use crate::pde::{EigenOptions, TorsionOptions};
use crate::surgery::{ConstantsOptions, DescentOptions, KPower, Mode, SurgeryConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "K")]
    pub k_threshold: f64,
    pub k: usize,
    /// Perimeter bound; `None` uses the perimeter of each input.
    #[serde(rename = "P")]
    pub p_bound: Option<f64>,
    pub h: f64,
    pub seed: u64,
    pub mode: Mode,
    pub k_power: KPower,
    pub exp: ExpConstant,
    pub m_table: MTable,
    pub torsion_tol: f64,
    pub eigen_tol: f64,
    /// Overrides the spacing-dependent check tolerance.
    pub rel_tol: Option<f64>,
    pub eigen_slack: f64,
    pub r0: Option<f64>,
    pub r0_fraction: f64,
    pub t_step: Option<f64>,
    pub axis: Axis,
    pub shape: ReplacementShape,
    pub max_moves: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k_threshold: 100.0,
            k: 2,
            p_bound: None,
            h: 1.0 / 256.0,
            seed: 1,
            mode: Mode::Faithful,
            k_power: KPower::default(),
            exp: ExpConstant::default(),
            m_table: MTable::default(),
            torsion_tol: TorsionOptions::default().tol,
            eigen_tol: EigenOptions::default().tol,
            rel_tol: None,
            eigen_slack: 1e-3,
            r0: None,
            r0_fraction: 0.0,
            t_step: None,
            axis: Axis::X,
            shape: ReplacementShape::Disk,
            max_moves: DescentOptions::default().max_moves,
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for `{key}`")))
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value.trim() {
        "" | "none" | "auto" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl RunConfig {
    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "K" => self.k_threshold = parse(key, v)?,
            "k" => self.k = parse(key, v)?,
            "P" => self.p_bound = optional(key, v)?,
            "h" => self.h = parse_spacing(v)?,
            "seed" => self.seed = parse(key, v)?,
            "mode" => self.mode = v.parse()?,
            "k-power" | "k_power" => self.k_power = v.parse()?,
            "exp" => self.exp = v.parse()?,
            "m-table" | "m_table" => self.m_table.parse_entries(v)?,
            "torsion-tol" | "torsion_tol" => self.torsion_tol = parse(key, v)?,
            "eigen-tol" | "eigen_tol" => self.eigen_tol = parse(key, v)?,
            "rel-tol" | "rel_tol" => self.rel_tol = optional(key, v)?,
            "eigen-slack" | "eigen_slack" => self.eigen_slack = parse(key, v)?,
            "r0" => self.r0 = optional(key, v)?,
            "r0-fraction" | "r0_fraction" => self.r0_fraction = parse(key, v)?,
            "t-step" | "t_step" => self.t_step = optional(key, v)?,
            "axis" => self.axis = v.parse()?,
            "shape" => self.shape = v.parse()?,
            "max-moves" | "max_moves" => self.max_moves = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every pair of a key-value text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("K", self.k_threshold),
            ("h", self.h),
            ("torsion-tol", self.torsion_tol),
            ("eigen-tol", self.eigen_tol),
            ("eigen-slack", self.eigen_slack),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("P", self.p_bound),
            ("rel-tol", self.rel_tol),
            ("r0", self.r0),
            ("t-step", self.t_step),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.r0_fraction) {
            return Err(Error::Config(format!(
                "r0-fraction must lie in [0, 1), got {}",
                self.r0_fraction
            )));
        }
        if let Mode::Practical(f) = self.mode {
            if !(f > 0.0 && f.is_finite()) || f == 1.0 {
                return Err(Error::Config(format!(
                    "practical factor must be positive and not 1, got {f}"
                )));
            }
        }
        if self.max_moves == 0 {
            return Err(Error::Config("max-moves must be at least 1".into()));
        }
        Ok(())
    }

    pub fn torsion_options(&self) -> TorsionOptions {
        TorsionOptions {
            tol: self.torsion_tol,
            ..Default::default()
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.eigen_tol,
            ..Default::default()
        }
    }

    pub fn check_options(&self, domain_id: Option<&str>) -> CheckOptions {
        CheckOptions {
            rel_tol: self.rel_tol,
            exp: self.exp,
            bly_constant: None,
            torsion: self.torsion_options(),
            eigen: self.eigen_options(),
            domain_id: domain_id.map(str::to_owned),
        }
    }

    pub fn surgery_config(&self, domain_id: Option<&str>) -> SurgeryConfig {
        SurgeryConfig {
            constants: ConstantsOptions {
                mode: self.mode,
                k_power: self.k_power,
                exp: self.exp,
                table: self.m_table.clone(),
                r0: self.r0,
                r0_fraction: self.r0_fraction,
            },
            axis: self.axis,
            shape: self.shape,
            torsion: self.torsion_options(),
            eigen: self.eigen_options(),
            eigen_slack: self.eigen_slack,
            t_step: self.t_step,
            descent: DescentOptions {
                max_moves: self.max_moves,
                ..Default::default()
            },
            domain_id: domain_id.map(str::to_owned),
            ..Default::default()
        }
    }
}

/// Accepts a plain number or a reciprocal `1/n`.
pub fn parse_spacing(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => parse::<f64>("h", a)? / parse::<f64>("h", b)?,
        None => parse("h", s)?,
    };
    Ok(v)
}
