//! Regularized averages over the modular curve.

use cmtrace::analytic::{regularized_average, FSpec};

fn main() -> cmtrace::Result<()> {
    for (f, tol) in [(FSpec::one(), 1e-8), (FSpec::big_j(), 1e-8), (FSpec::faber(2)?, 1e-5)] {
        let a = regularized_average(&f, tol)?;
        println!("{:>3}: {:.9} (err {:.1e})", f.name(), a.value, a.err);
    }
    Ok(())
}
