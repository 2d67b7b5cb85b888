//! The Kudla-Millson theta lift of 1 and of J on the level 4 lattice.

use cmtrace::analytic::FSpec;
use cmtrace::thetalift::{disc_form_of, eisen_prediction, fourier_extract, theta_integral, LatticeSpec};
use num_complex::Complex64;
use num_rational::Rational64;

fn main() -> cmtrace::Result<()> {
    let d = disc_form_of(&LatticeSpec::level4())?;
    let tau = Complex64::new(0.1, 1.0);
    let i0 = theta_integral(&d, 0, tau, &FSpec::one(), 1e-6)?;
    let i1 = theta_integral(&d, 1, tau, &FSpec::one(), 1e-6)?;
    println!("f = 1:  (I0 + I1)/2 = {:.10}", 0.5 * (i0.value() + i1.value()));
    println!("        prediction  = {:.10}", eisen_prediction(tau, 400));

    for (h, m) in [(1, Rational64::new(3, 4)), (0, Rational64::from_integer(1)), (1, Rational64::new(7, 4))] {
        let c = fourier_extract(&d, h, m, 1.0, &FSpec::big_j(), 8, 1e-6)?;
        println!("f = J:  coefficient at m = {m} (D = {}): {:.6}", m * 4, c.re);
    }
    Ok(())
}
