//! Classical inequalities for the torsion function and Dirichlet eigenvalues,
//! evaluated on computed data.

mod checks;
mod constants;
mod report;

pub use checks::{
    check_berezin_li_yau, check_gamma_stability, check_local_density, check_positive_energy,
    check_ratio_bound, check_saint_venant, check_talenti, check_vdb, density_radius,
    gamma_identity_report, gamma_stability_report, CheckOptions, SolvedDomain,
};
pub use constants::{
    ball_ratio, berezin_li_yau_constant, lambda1_unit_ball, max_index_below, omega,
    saint_venant_bound, talenti_bound, vdb_factor, ExpConstant, MTable, J0_1, J1_1, J3HALF_1,
};
pub use report::{default_rel_tol, CheckStatus, IneqReport, ReportContext};
