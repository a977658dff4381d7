//! Test corpus, batch runs and grid convergence studies.

mod config;
mod corpus;
mod study;
mod suite;

pub use config::{parse_spacing, RunConfig};
pub use corpus::{
    default_corpus, generate, surgery_corpus, unit_disk_radius, CorpusSpec, Generator,
};
pub use study::{convergence_study, richardson, Extrapolation, StudyRow, StudyTable};
pub use suite::{
    inequality_checks, read_reports, run_domain, run_suite, write_reports, write_summary,
    DomainRow, RowStatus, SuiteOptions, SuiteResult, REPORTS_FILE, SUMMARY_FILE,
};
