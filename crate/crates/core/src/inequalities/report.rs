use serde::{Deserialize, Serialize};

/// Default relative tolerance for checks at lattice spacing `h`: raster
/// geometry is first-order accurate.
pub fn default_rel_tol(h: f64) -> f64 {
    (5.0 * h).max(1e-6)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Checked,
    /// The hypothesis of the inequality does not hold; nothing was tested.
    PreconditionUnmet,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportContext {
    pub domain: Option<String>,
    pub h: f64,
    pub k: Option<usize>,
}

impl ReportContext {
    pub fn new(domain: Option<&str>, h: f64) -> Self {
        ReportContext {
            domain: domain.map(str::to_owned),
            h,
            k: None,
        }
    }

    pub fn with_k(&self, k: usize) -> Self {
        ReportContext {
            k: Some(k),
            ..self.clone()
        }
    }
}

/// Outcome of one inequality `lhs <= rhs`, optionally two-sided
/// `lower <= lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IneqReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub lower: Option<f64>,
    /// `rhs - lhs`, or the smaller of both gaps when two-sided.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: CheckStatus,
    pub context: ReportContext,
}

impl IneqReport {
    pub fn upper(name: &str, lhs: f64, rhs: f64, rel_tol: f64, context: ReportContext) -> Self {
        let margin = rhs - lhs;
        let tolerance = rel_tol * lhs.abs().max(rhs.abs());
        IneqReport {
            name: name.to_owned(),
            lhs,
            rhs,
            lower: None,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            status: CheckStatus::Checked,
            context,
        }
    }

    pub fn two_sided(
        name: &str,
        lower: f64,
        value: f64,
        upper: f64,
        rel_tol: f64,
        context: ReportContext,
    ) -> Self {
        let margin = (value - lower).min(upper - value);
        let tolerance = rel_tol * lower.abs().max(value.abs()).max(upper.abs());
        IneqReport {
            name: name.to_owned(),
            lhs: value,
            rhs: upper,
            lower: Some(lower),
            margin,
            tolerance,
            pass: margin >= -tolerance,
            status: CheckStatus::Checked,
            context,
        }
    }

    /// Marks the report as not applicable. `pass` keeps its arithmetic
    /// meaning; use [`IneqReport::is_failure`] to decide.
    pub fn unmet(mut self) -> Self {
        self.status = CheckStatus::PreconditionUnmet;
        self
    }

    /// Checked and violated beyond tolerance.
    pub fn is_failure(&self) -> bool {
        self.status == CheckStatus::Checked && !self.pass
    }

    /// `margin / max(|lhs|, |rhs|)`.
    pub fn relative_margin(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.margin / scale
        }
    }
}
