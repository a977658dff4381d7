//! Grid convergence of eigenvalues and torsion quantities with Richardson
//! extrapolation.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::corpus::{generate, CorpusSpec};
use crate::domain::measure;
use crate::error::{Error, Result};
use crate::pde::{eigenvalues, solve_torsion};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub cells: usize,
    pub measure: f64,
    pub eigenvalues: Vec<f64>,
    pub torsion_max: f64,
    pub torsion_integral: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub order: f64,
    /// Only two grids were available and second order was assumed.
    pub assumed_order: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub id: String,
    /// Ordered from coarse to fine.
    pub rows: Vec<StudyRow>,
    pub lambda1: Option<Extrapolation>,
    pub torsion_max: Option<Extrapolation>,
    pub torsion_integral: Option<Extrapolation>,
}

/// Richardson extrapolation from the last grids of a coarse-to-fine
/// sequence. Three grids with a common refinement ratio give the observed
/// order `ln((f1 - f2) / (f2 - f3)) / ln r`; two grids assume order 2.
/// Returns `None` for a single grid, for non-monotone differences, or when
/// the three spacings are not in geometric progression.
pub fn richardson(h: &[f64], f: &[f64]) -> Option<Extrapolation> {
    let n = h.len().min(f.len());
    if n < 2 {
        return None;
    }
    if n == 2 {
        let r = h[0] / h[1];
        let (f1, f2) = (f[0], f[1]);
        return Some(Extrapolation {
            limit: f2 + (f2 - f1) / (r * r - 1.0),
            order: 2.0,
            assumed_order: true,
        });
    }
    let (h1, h2, h3) = (h[n - 3], h[n - 2], h[n - 1]);
    let (f1, f2, f3) = (f[n - 3], f[n - 2], f[n - 1]);
    let r = h1 / h2;
    if ((h2 / h3) / r - 1.0).abs() > 1e-9 || r <= 1.0 {
        return None;
    }
    let q = (f1 - f2) / (f2 - f3);
    if !(q > 0.0 && q.is_finite()) {
        return None;
    }
    let order = q.ln() / r.ln();
    Some(Extrapolation {
        limit: f3 + (f3 - f2) / (r.powf(order) - 1.0),
        order,
        assumed_order: false,
    })
}

/// Solves the spec at every spacing in `h_list` (any order; sorted coarse to
/// fine) and extrapolates `lambda_1`, the torsion maximum and the torsion
/// integral.
pub fn convergence_study(
    spec: &CorpusSpec,
    h_list: &[f64],
    k: usize,
    cfg: &RunConfig,
) -> Result<StudyTable> {
    if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument(
            "study needs positive grid spacings".into(),
        ));
    }
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.dedup();
    let mut rows = Vec::with_capacity(hs.len());
    for &h in &hs {
        let s = CorpusSpec { h, ..spec.clone() };
        let d = generate(&s)?;
        let f = solve_torsion(&d, &cfg.torsion_options())?;
        let sp = eigenvalues(&d, k.max(1).min(d.cell_count()), &cfg.eigen_options())?;
        rows.push(StudyRow {
            h,
            cells: d.cell_count(),
            measure: measure(&d),
            eigenvalues: sp.eigenvalues,
            torsion_max: f.max(),
            torsion_integral: f.integral(),
        });
    }
    let col = |g: fn(&StudyRow) -> f64| richardson(&hs, &rows.iter().map(g).collect::<Vec<_>>());
    Ok(StudyTable {
        id: spec.id.clone(),
        lambda1: col(|r| r.eigenvalues[0]),
        torsion_max: col(|r| r.torsion_max),
        torsion_integral: col(|r| r.torsion_integral),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus::Generator;
    use approx::assert_relative_eq;

    #[test]
    fn richardson_recovers_a_pure_power_law() {
        let h = [0.1, 0.05, 0.025];
        let f: Vec<f64> = h.iter().map(|x| 3.0 + 2.0 * x * x * x).collect();
        let e = richardson(&h, &f).unwrap();
        assert_relative_eq!(e.order, 3.0, epsilon = 1e-9);
        assert_relative_eq!(e.limit, 3.0, epsilon = 1e-12);
        let e = richardson(&h[..2], &[1.0 + 0.01, 1.0 + 0.0025]).unwrap();
        assert!(e.assumed_order);
        assert_relative_eq!(e.limit, 1.0, epsilon = 1e-12);
        assert!(richardson(&h[..1], &f[..1]).is_none());
    }

    #[test]
    fn single_grid_has_one_row_and_no_limit() {
        let spec = CorpusSpec::new("square", Generator::Square { side: 1.0 }, 1.0 / 16.0, 0);
        let t = convergence_study(&spec, &[1.0 / 16.0], 1, &RunConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.lambda1.is_none());
    }
}
