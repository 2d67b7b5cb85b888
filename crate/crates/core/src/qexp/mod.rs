//! Exact q-expansions: series arithmetic, classical forms, Faber functions
//! and the weight 3/2 plus-space solver.

mod classical;
mod faber;
mod plus;
mod series;

pub use classical::{
    big_j_series, coefficient_denominator, eisenstein, eta, eta_quotient, euler_product, g_series, j_series, sigma,
    sigma1, theta_series,
};
pub use faber::{faber, weight_basis, Faber, JPoly};
pub use plus::{plus_space_solve, predicted_series, satisfies_plus_condition, PrincipalPart, SolveDiagnostics};
pub use series::{rational_string, QSeries, SeriesJson};
