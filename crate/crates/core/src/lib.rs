//! Traces of CM values of modular functions.
//!
//! The crate computes modular traces `t_f(D)` of weakly holomorphic modular
//! functions over Heegner points, checks the weight 3/2 generating series they
//! form against exact q-expansions, evaluates the Rademacher-type exact
//! formulas and asymptotics, and numerically evaluates the Kudla-Millson theta
//! lift whose Fourier coefficients are these traces.
//!
//! Modules:
//! - [`qform`]: binary quadratic forms, reduction, class numbers, level-p orbits.
//! - [`qexp`]: exact Laurent q-series, eta quotients, Faber bases and the
//!   weight 3/2 plus-space solver.
//! - [`analytic`]: high-precision CM values and traces, Kloosterman sums,
//!   Bessel functions, exact formulas, Duke's statistic, regularized averages.
//! - [`thetalift`]: the quadratic space of trace-zero matrices, the theta
//!   kernel, the theta integral and the Weil representation.
//! - [`cli`]: command line front end, cache and report emission.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod qexp;
pub mod qform;
pub mod quad;
pub mod thetalift;

pub use error::{Error, Result};
