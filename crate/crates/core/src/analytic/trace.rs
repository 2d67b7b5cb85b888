//! Modular traces over Heegner points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::eval::{eval_at_form, FSpec};
use super::hp::RealHP;
use crate::error::{Error, Result};
use crate::qform::level_p_orbits;

/// Largest residual accepted when rounding a trace.
pub const ROUNDING_THRESHOLD: f64 = 1e-6;

/// A trace together with its certified rounding.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub d: i64,
    pub p: u64,
    pub f: String,
    pub value_numeric: RealHP,
    pub value_rounded: BigRational,
    pub residual: f64,
}

/// Working precision for `t_f(D)`: values grow like `e^(m pi sqrt(D) / p)`
/// for a pole of order `m`, so that many bits plus guard bits and the size of
/// the coefficients.
pub fn default_precision(f: &FSpec, d: i64) -> usize {
    let m = f.pole_order().max(1) as f64;
    let p = f.level() as f64;
    let growth = (std::f64::consts::PI * (d.max(1) as f64).sqrt() / (p * std::f64::consts::LN_2)).ceil();
    (m * growth) as usize + 64 + f.coefficient_bits() + 16
}

/// Denominator that clears the weights `1/|stabilizer|` and the coefficients of `f`.
fn rounding_denominator(f: &FSpec) -> Result<i64> {
    let base: i64 = if f.level() == 1 { 6 } else { 12 };
    let lcm = f.coefficient_lcm().to_i64().ok_or_else(|| Error::InvalidArgument("coefficient denominators too large".into()))?;
    base.checked_mul(lcm).ok_or_else(|| Error::InvalidArgument("coefficient denominators too large".into()))
}

/// The unrounded trace `sum f(alpha_Q) / |stab|` and a bound on its imaginary part.
pub fn trace_numeric(f: &FSpec, d: i64, precision: usize) -> Result<(RealHP, f64)> {
    let p = f.level();
    let orbits = level_p_orbits(d, p)?;
    let mut sum = RealHP::zero(precision);
    let mut imag = RealHP::zero(precision);
    for o in &orbits {
        let v = eval_at_form(f, &o.form, precision)?;
        let w = RealHP::from_i64(o.stabilizer_order as i64, precision);
        sum = sum.add(&v.re().div(&w));
        imag = imag.add(&v.im().div(&w));
    }
    Ok((sum, imag.abs_f64() + imag.err()))
}

/// `t_f(D)` (or `t*_f(D)` when `f` has level `p > 1`), rounded to an exact
/// rational and certified: the distance between the numeric value and the
/// rounded one, plus the numeric error bound, must stay below
/// [`ROUNDING_THRESHOLD`].
pub fn trace(f: &FSpec, d: i64, p: u64, precision: Option<usize>) -> Result<TraceEntry> {
    if d <= 0 {
        return Err(Error::InvalidArgument(format!("discriminant {d} must be positive")));
    }
    if p != f.level() {
        return Err(Error::InvalidArgument(format!("{f} is a function of level {}, not {p}", f.level())));
    }
    let prec = precision.unwrap_or_else(|| default_precision(f, d));
    if d.rem_euclid(4) == 1 || d.rem_euclid(4) == 2 {
        return Ok(TraceEntry {
            d,
            p,
            f: f.name().to_string(),
            value_numeric: RealHP::zero(prec),
            value_rounded: BigRational::zero(),
            residual: 0.0,
        });
    }
    let (value, imag) = trace_numeric(f, d, prec)?;
    let den = rounding_denominator(f)?;
    let (n, dist) = value.round_scaled(den);
    let residual = dist.max(imag);
    let certified_by = residual + value.err();
    if !(certified_by < ROUNDING_THRESHOLD) {
        return Err(Error::Uncertified { residual: certified_by, threshold: ROUNDING_THRESHOLD });
    }
    Ok(TraceEntry {
        d,
        p,
        f: f.name().to_string(),
        value_numeric: value,
        value_rounded: BigRational::new(n, BigInt::from(den)),
        residual,
    })
}

/// Traces for every `D` in `ds`, computed in parallel and returned in input order.
pub fn trace_table(f: &FSpec, ds: &[i64], p: u64, precision: Option<usize>) -> Vec<Result<TraceEntry>> {
    ds.par_iter().map(|&d| trace(f, d, p, precision)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::eval::highest_representative;
    use crate::qform::gamma0_classes;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn first_traces_of_j() {
        let f = FSpec::big_j();
        for (d, t) in [(3, -248), (4, 492), (7, -4119), (8, 7256)] {
            let e = trace(&f, d, 1, None).unwrap();
            assert_eq!(e.value_rounded, int(t), "D={d}");
            assert!(e.residual < 1e-6);
        }
    }

    #[test]
    fn j2_at_four() {
        // J_2(i) = 1728^2 - 1488 * 1728 + 159768 = 574488, stabilizer 2
        let e = trace(&FSpec::faber(2).unwrap(), 4, 1, None).unwrap();
        assert_eq!(e.value_rounded, int(287244));
    }

    #[test]
    fn trace_of_one_is_hurwitz() {
        for d in [3, 4, 12, 15, 16, 20, 23, 27, 28] {
            let e = trace(&FSpec::one(), d, 1, None).unwrap();
            let h = crate::qform::hurwitz(d);
            assert_eq!(e.value_rounded, BigRational::new((*h.numer()).into(), (*h.denom()).into()));
        }
    }

    #[test]
    fn non_discriminants_vanish() {
        let e = trace(&FSpec::big_j(), 5, 1, None).unwrap();
        assert!(e.value_rounded.is_zero());
        assert!(trace(&FSpec::big_j(), 0, 1, None).is_err());
        assert!(trace(&FSpec::big_j(), 7, 2, None).is_err());
    }

    #[test]
    fn low_precision_is_not_rounded_silently() {
        let err = trace(&FSpec::faber(3).unwrap(), 163, 1, Some(40)).unwrap_err();
        assert!(matches!(err, Error::Uncertified { .. } | Error::PrecisionUnachievable(_)), "{err:?}");
    }

    #[test]
    fn level_p_trace_is_half_gamma0_sum() {
        for p in [2u64, 3, 5, 7, 13] {
            let f = FSpec::hauptmodul(p).unwrap();
            for d in [3i64, 4, 7, 8, 11, 12, 15, 19, 20, 23] {
                let e = match trace(&f, d, p, None) {
                    Ok(e) => e,
                    Err(err) => panic!("p={p} D={d}: {err}"),
                };
                // each Gamma_0(p) class evaluated at its own maximal-height point
                let prec = default_precision(&f, d);
                let mut s = 0.0;
                for (_, form, stab) in gamma0_classes(d, p).unwrap() {
                    let h = highest_representative(&form, p).unwrap();
                    let v = crate::analytic::eval::eval_at_form(&f, &h, prec).unwrap();
                    s += v.re().to_f64() / stab as f64;
                }
                let r = e.value_rounded.to_f64().unwrap();
                assert!((s / 2.0 - r).abs() < 1e-6 * r.abs().max(1.0), "p={p} D={d}: {s} vs {r}");
            }
        }
    }

    #[test]
    fn table_keeps_order() {
        let ds: Vec<i64> = (3..40).collect();
        let t = trace_table(&FSpec::big_j(), &ds, 1, None);
        for (d, e) in ds.iter().zip(&t) {
            assert_eq!(e.as_ref().unwrap().d, *d);
        }
    }
}
