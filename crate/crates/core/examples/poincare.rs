//! Fourier coefficients of a weight 4 Poincare series from Kloosterman sums and Bessel functions.

use cmtrace::analytic::{kloosterman, poincare_coeffs};

fn main() -> cmtrace::Result<()> {
    println!("K(1, 1, c) for c = 1..10:");
    for c in 1..=10 {
        print!(" {:.4}", kloosterman(1, 1, c, 64)?.to_f64());
    }
    println!();
    for c_max in [100, 1000, 10000] {
        for p in poincare_coeffs(4, 1, &[1, 2, 3], c_max, 128)? {
            println!("c_max = {c_max:>5}  n = {}  {:.6}  (tail {:.1e})", p.n, p.value.to_f64(), p.tail_estimate);
        }
    }
    Ok(())
}
