//! Discriminant forms and the Weil representation for the level 4p lattices.

use cmtrace::thetalift::{disc_form_of, weil_rep, LatticeSpec};

fn main() -> cmtrace::Result<()> {
    for spec in [LatticeSpec::level4(), LatticeSpec::level4p(2)?, LatticeSpec::level4p(3)?] {
        let d = disc_form_of(&spec)?;
        let w = weil_rep(&d)?;
        println!(
            "{}: invariants {:?}, {} cosets, signature {} mod 8, unitarity defect {:.1e}, braid defect {:.1e}",
            spec.name,
            d.invariants,
            d.len(),
            d.signature_mod8,
            w.unitarity_defect(),
            w.braid_defect()
        );
    }
    Ok(())
}
