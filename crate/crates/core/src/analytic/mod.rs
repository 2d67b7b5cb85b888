//! High-precision evaluation: CM values, traces, exponential sums, Bessel
//! functions and the analytic formulas built from them.

pub mod eval;
pub mod formulas;
pub mod hp;
pub mod kloosterman;
pub mod trace;

pub use eval::{eval_at_form, eval_modular, highest_representative, j_f64, FSpec, HAUPTMODUL_PRIMES};
pub use formulas::{
    asymptotic_residual, beta_f64, beta_integral, duke_series, duke_statistic, duke_window, exact_formula_tj, regularized_average,
    AverageResult, DukeWindow, CUT_HEIGHT,
};
pub use hp::{ComplexHP, RealHP};
pub use kloosterman::{bessel_i, exp_sum_s, kloosterman, poincare_coeff, poincare_coeffs, PoincareCoeff};
pub use trace::{default_precision, trace, trace_numeric, trace_table, TraceEntry, ROUNDING_THRESHOLD};
