//! Batch runs over a corpus with JSON-lines reports and a CSV summary.

use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::corpus::{generate, CorpusSpec};
use crate::domain::{measure, GridDomain};
use crate::error::Result;
use crate::inequalities::{
    check_berezin_li_yau, check_ratio_bound, check_saint_venant, check_talenti, check_vdb,
    IneqReport,
};
use crate::pde::{eigenvalues, solve_torsion};
use crate::surgery::{bounded_surgery, strip_surgery, BoundedReport, SurgeryReport, Verdict};

pub const REPORTS_FILE: &str = "reports.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Largest index of the Berezin-Li-Yau check.
    pub bly_max_k: usize,
    /// Index of the eigenvalue-ratio check.
    pub ratio_k: usize,
    pub surgery: bool,
    pub bounded: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            bly_max_k: 5,
            ratio_k: 2,
            surgery: false,
            bounded: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Error,
}

/// Everything computed for one corpus item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainRow {
    pub id: String,
    pub generator: String,
    pub h: f64,
    pub seed: u64,
    pub status: RowStatus,
    pub error: Option<String>,
    pub cells: usize,
    pub measure: f64,
    /// Saint-Venant, Talenti and the torsion-eigenvalue bound all held.
    pub gate_passed: bool,
    pub checks: Vec<IneqReport>,
    pub surgery: Option<SurgeryReport>,
    pub bounded: Option<BoundedReport>,
    pub pass: bool,
}

impl DomainRow {
    fn error(spec: &CorpusSpec, message: String) -> Self {
        DomainRow {
            id: spec.id.clone(),
            generator: spec.generator.name().to_owned(),
            h: spec.h,
            seed: spec.seed,
            status: RowStatus::Error,
            error: Some(message),
            cells: 0,
            measure: 0.0,
            gate_passed: false,
            checks: Vec::new(),
            surgery: None,
            bounded: None,
            pass: false,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &IneqReport> {
        self.checks.iter().filter(|r| r.is_failure())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    /// Sorted by domain id.
    pub rows: Vec<DomainRow>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn error_rows(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Error)
            .count()
    }
}

/// Inequality checks on one domain; the first three form the sanity gate.
pub fn inequality_checks(
    d: &GridDomain,
    id: &str,
    cfg: &RunConfig,
    opts: &SuiteOptions,
) -> Result<Vec<IneqReport>> {
    let co = cfg.check_options(Some(id));
    let f = solve_torsion(d, &co.torsion)?;
    let kmax = opts.bly_max_k.max(opts.ratio_k).max(1).min(d.cell_count());
    let s = eigenvalues(d, kmax, &co.eigen)?;
    let h = d.h();
    let mut out = vec![
        check_saint_venant(&f, &co),
        check_talenti(&f, &co),
        check_vdb(&f, &s, &co)?,
    ];
    for k in 1..=opts.bly_max_k.min(kmax) {
        out.push(check_berezin_li_yau(&s, measure(d), k, d.dim(), h, &co)?);
    }
    if opts.ratio_k >= 1 && opts.ratio_k <= kmax {
        out.push(check_ratio_bound(&s, opts.ratio_k, &cfg.m_table, h, &co)?);
    }
    Ok(out)
}

fn run_row(
    spec: &CorpusSpec,
    d: &GridDomain,
    cfg: &RunConfig,
    opts: &SuiteOptions,
) -> Result<DomainRow> {
    let checks = inequality_checks(d, &spec.id, cfg, opts)?;
    let gate_passed = checks.iter().take(3).all(|r| !r.is_failure());
    let mut row = DomainRow {
        id: spec.id.clone(),
        generator: spec.generator.name().to_owned(),
        h: spec.h,
        seed: spec.seed,
        status: RowStatus::Ok,
        error: None,
        cells: d.cell_count(),
        measure: measure(d),
        gate_passed,
        checks,
        surgery: None,
        bounded: None,
        pass: false,
    };
    if !gate_passed {
        log::warn!("{} failed the sanity gate; surgery skipped", spec.id);
    } else {
        let sc = cfg.surgery_config(Some(&spec.id));
        if opts.surgery {
            row.surgery = Some(strip_surgery(d, cfg.k_threshold, cfg.k, cfg.p_bound, &sc)?.report);
        }
        if opts.bounded {
            row.bounded = Some(bounded_surgery(d, cfg.k_threshold, cfg.k, &sc)?.report);
        }
    }
    row.pass = row.gate_passed
        && row.failed_checks().next().is_none()
        && row
            .surgery
            .as_ref()
            .is_none_or(|r| r.verdict != Verdict::Fail)
        && row
            .bounded
            .as_ref()
            .is_none_or(|r| r.verdict != Verdict::Fail);
    Ok(row)
}

/// Runs one corpus item; failures become an error row.
pub fn run_domain(spec: &CorpusSpec, cfg: &RunConfig, opts: &SuiteOptions) -> DomainRow {
    let result = generate(spec).and_then(|d| run_row(spec, &d, cfg, opts));
    result.unwrap_or_else(|e| {
        log::error!("{}: {e}", spec.id);
        DomainRow::error(spec, e.to_string())
    })
}

/// Runs every item of the corpus. Items are independent and processed in
/// parallel; rows come back sorted by id.
pub fn run_suite(
    corpus: &[CorpusSpec],
    cfg: &RunConfig,
    opts: &SuiteOptions,
) -> Result<SuiteResult> {
    cfg.validate()?;
    let mut rows: Vec<DomainRow> = corpus
        .par_iter()
        .map(|s| run_domain(s, cfg, opts))
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SuiteResult { rows })
}

/// Appends the rows to `dir/reports.jsonl` and regenerates
/// `dir/summary.csv` from the whole file.
pub fn write_reports(rows: &[DomainRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(REPORTS_FILE);
    let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
    for r in rows {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    drop(f);
    write_summary(&path, &dir.join(SUMMARY_FILE))
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    id: &'a str,
    generator: &'a str,
    h: f64,
    status: RowStatus,
    cells: usize,
    gate: bool,
    checks: usize,
    failed: usize,
    worst_check: &'a str,
    surgery: Option<Verdict>,
    bounded: Option<Verdict>,
    pass: bool,
    error: &'a str,
}

/// One CSV line per report in a JSON-lines file.
pub fn write_summary(jsonl: &Path, csv_path: &Path) -> Result<()> {
    let rows = read_reports(jsonl)?;
    let mut w = csv::Writer::from_path(csv_path)?;
    for r in &rows {
        let worst = r
            .checks
            .iter()
            .filter(|c| c.is_failure())
            .min_by(|a, b| a.relative_margin().total_cmp(&b.relative_margin()))
            .map_or("", |c| c.name.as_str());
        w.serialize(SummaryLine {
            id: &r.id,
            generator: &r.generator,
            h: r.h,
            status: r.status,
            cells: r.cells,
            gate: r.gate_passed,
            checks: r.checks.len(),
            failed: r.failed_checks().count(),
            worst_check: worst,
            surgery: r.surgery.as_ref().map(|s| s.verdict),
            bounded: r.bounded.as_ref().map(|s| s.verdict),
            pass: r.pass,
            error: r.error.as_deref().unwrap_or(""),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports(jsonl: &Path) -> Result<Vec<DomainRow>> {
    let f = fs::File::open(jsonl)?;
    let mut rows = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line)?);
        }
    }
    Ok(rows)
}
