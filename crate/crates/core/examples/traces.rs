//! Certified traces of J at CM points, checked against the coefficients of g.

use cmtrace::analytic::{trace_table, FSpec};
use cmtrace::qexp::g_series;

fn main() -> cmtrace::Result<()> {
    let ds: Vec<i64> = (3..=40).filter(|d| d % 4 == 0 || d % 4 == 3).collect();
    let g = g_series(41)?;
    for (d, e) in ds.iter().zip(trace_table(&FSpec::big_j(), &ds, 1, None)) {
        let e = e?;
        let agree = e.value_rounded == g.coeff_int(*d)?;
        println!("D = {d:>2}  t_J = {:>22}  residual {:.1e}  matches g: {agree}", e.value_rounded.to_string(), e.residual);
    }
    // level 2: J replaced by the Hauptmodul of Gamma0*(2)
    let t = cmtrace::analytic::trace(&FSpec::hauptmodul(2)?, 7, 2, None)?;
    println!("level 2, D = 7: {}", t.value_rounded);
    Ok(())
}
