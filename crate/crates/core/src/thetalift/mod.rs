//! Kudla-Millson theta lift: lattices in the trace-zero matrices, the theta
//! kernel, its integral over the modular curve and the Weil representation.

mod integral;
mod kernel;
mod lattice;
mod weil;

pub use integral::{eisen_prediction, fourier_extract, theta_integral, FourierCoefficient, ThetaIntegral};
pub use kernel::{theta_kernel, theta_kernel_direct, KERNEL_BUDGET};
pub use lattice::{km_value, majorant, vector_of_form, x_of_z, LatticeSpec, LatticeVector};
pub use weil::{disc_form_of, smith_normal_form, weil_rep, DiscForm, WeilRepMatrices};
