//! Partial sums of the exact formula for t_J(D) and the leading asymptotic.

use cmtrace::analytic::{asymptotic_residual, exact_formula_tj, trace, FSpec};

fn main() -> cmtrace::Result<()> {
    for d in [3, 7, 20, 163] {
        let t = trace(&FSpec::big_j(), d, 1, None)?.value_rounded;
        print!("D = {d:>3}: t_J = {t}; partial sums");
        for c_max in [4, 40, 400, 4000] {
            print!("  {}", exact_formula_tj(d, c_max, 128)?.to_decimal(12));
        }
        println!();
        println!("         t_J - (-1)^D e^(pi sqrt D) = {}", asymptotic_residual(d, 256)?.to_decimal(12));
    }
    Ok(())
}
