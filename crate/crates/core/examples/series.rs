//! Exact q-expansions: j, the generating series g, Faber functions and the plus space.

use cmtrace::qexp::{faber, g_series, j_series, plus_space_solve, predicted_series, QSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

fn show(name: &str, s: &QSeries, terms: usize) {
    let body: Vec<String> = s.terms().take(terms).map(|(e, c)| format!("{c} q^{e}")).collect();
    println!("{name} = {} + ...", body.join(" + "));
}

fn main() -> cmtrace::Result<()> {
    show("j", &j_series(4)?, 5);
    show("g", &g_series(13)?, 8);
    for m in 2..=3 {
        let f = faber(m, 3)?;
        println!("J_{m} as a polynomial in j: {:?}", f.poly.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>());
        show(&format!("J_{m}"), &f.series, 4);
        let a: BTreeMap<i64, BigRational> = [(m as i64, BigRational::from_integer(BigInt::from(1)))].into_iter().collect();
        let plus = plus_space_solve(&predicted_series(&a, 1)?, 13)?;
        show(&format!("traces of J_{m}"), &plus, 8);
    }
    Ok(())
}
