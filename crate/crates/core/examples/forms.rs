//! Reduction, class numbers and level-p orbits of positive definite forms.

use cmtrace::qform::{enumerate_reduced, hurwitz, level_p_orbits, reduce_with_matrix, stabilizer_order, QuadForm};

fn main() -> cmtrace::Result<()> {
    let q = QuadForm::new(7, 13, 7)?;
    let (r, m) = reduce_with_matrix(&q)?;
    println!("{q:?} reduces to {r:?} via {:?}", m.0);

    for d in [3, 4, 23, 71, 99] {
        let forms = enumerate_reduced(d);
        let listed: Vec<String> = forms
            .iter()
            .map(|f| format!("[{},{},{}]/{}", f.a, f.b, f.c, stabilizer_order(f).unwrap()))
            .collect();
        println!("D = {d:>3}: H = {}, forms {}", hurwitz(d), listed.join(" "));
    }

    for p in [2, 3, 5] {
        let orbits = level_p_orbits(71, p)?;
        println!("D = 71, p = {p}: {} orbits under Gamma0*(p)", orbits.len());
    }
    Ok(())
}
