//! The exact formula for `t_J(D)`, its leading asymptotics, Duke's
//! equidistribution statistic, regularized averages over the modular curve
//! and the incomplete gamma integral `beta(s)`.

use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::eval::{eval_at_form, j_f64, series_hp, FSpec};
use super::hp::{ComplexHP, RealHP};
use super::kloosterman::exp_sum_s;
use super::trace::trace;
use crate::error::{Error, Result};
use crate::qexp::big_j_series;
use crate::qform::{cm_point, enumerate_reduced, hurwitz, is_fundamental, stabilizer_order};
use crate::quad::{adaptive, tanh_sinh_unit};

fn check_disc(d: i64) -> Result<()> {
    if d <= 0 || !matches!(d.rem_euclid(4), 0 | 3) {
        return Err(Error::InvalidArgument(format!("{d} is not a positive discriminant (D = 0, 3 mod 4)")));
    }
    Ok(())
}

fn hurwitz_hp(d: i64, precision: usize) -> RealHP {
    let h = hurwitz(d);
    RealHP::from_ratio(*h.numer(), *h.denom(), precision)
}

/// `-24 H(D) + sum over 4 | c <= c_max of S(D, c) sinh(4 pi sqrt(D) / c)`.
pub fn exact_formula_tj(d: i64, c_max: u64, precision: usize) -> Result<RealHP> {
    check_disc(d)?;
    if !c_max.is_multiple_of(4) {
        return Err(Error::InvalidArgument(format!("c_max = {c_max} must be divisible by 4")));
    }
    let four_pi_sqrt_d = RealHP::pi(precision).mul_i64(4).mul(&RealHP::from_i64(d, precision).sqrt());
    let mut sum = hurwitz_hp(d, precision).mul_i64(-24);
    for c in (4..=c_max).step_by(4) {
        let s = exp_sum_s(d, c, precision)?;
        if s.abs_f64() == 0.0 && s.err() == 0.0 {
            continue;
        }
        let x = four_pi_sqrt_d.div(&RealHP::from_i64(c as i64, precision));
        sum = sum.add(&s.mul(&x.sinh()));
    }
    Ok(sum)
}

/// `t_J(D) - (-1)^D e^(pi sqrt(D))`.
pub fn asymptotic_residual(d: i64, precision: usize) -> Result<RealHP> {
    check_disc(d)?;
    let t = trace(&FSpec::big_j(), d, 1, None)?;
    let prec = precision.max(t.value_numeric.prec());
    let main = RealHP::pi(prec).mul(&RealHP::from_i64(d, prec).sqrt()).exp();
    let main = if d % 2 == 0 { main } else { main.neg() };
    let exact = RealHP::from_rational(&t.value_rounded, prec);
    Ok(exact.sub(&main))
}

/// `(t_J(D) - sum over reduced Q with Im(alpha_Q) > 1 of e(-alpha_Q)) / H(D)`.
///
/// Points with `Im(alpha_Q) > 1` contribute `J(alpha_Q) - q^-1`, summed from
/// the q-expansion so that nothing large cancels.
pub fn duke_statistic(d: i64, precision: usize) -> Result<RealHP> {
    check_disc(d)?;
    let prec = precision.max(64);
    // J - q^-1 converges like e^(4 pi sqrt n - 2 pi n) for Im > 1
    let terms = 8 + (prec as f64 / 9.0) as i64 + 10;
    let tail = big_j_series(terms)?;
    let tail = tail.sub(&crate::qexp::QSeries::monomial(
        num_rational::BigRational::from_integer(1.into()),
        num_rational::Rational64::from_integer(-1),
        tail.trunc(),
    ));
    let mut sum = RealHP::zero(prec);
    for form in enumerate_reduced(d) {
        let w = RealHP::from_i64(stabilizer_order(&form)? as i64, prec);
        let v = if 4 * form.a * form.a < d {
            let pt = cm_point(&form, prec + 32)?;
            let two_pi = RealHP::pi(prec + 32).mul_i64(2);
            let arg = ComplexHP::from_parts(pt.value.im().mul(&two_pi).neg(), pt.value.re().mul(&two_pi));
            series_hp(&tail, &arg.exp(), prec + 32)
        } else {
            eval_at_form(&FSpec::big_j(), &form, prec)?
        };
        sum = sum.add(&v.re().div(&w));
    }
    Ok(sum.div(&hurwitz_hp(d, prec)))
}

/// Windowed means of [`duke_statistic`] over fundamental discriminants.
#[derive(Debug, Clone, PartialEq)]
pub struct DukeWindow {
    pub lo: i64,
    pub hi: i64,
    pub count: usize,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_err: f64,
}

/// Duke statistics for every fundamental `D` in `[lo, hi]`, in order.
pub fn duke_series(lo: i64, hi: i64, precision: usize) -> Result<Vec<(i64, f64)>> {
    use rayon::prelude::*;
    let ds: Vec<i64> = (lo.max(3)..=hi).filter(|&d| matches!(d % 4, 0 | 3) && is_fundamental(d)).collect();
    ds.par_iter().map(|&d| duke_statistic(d, precision).map(|v| (d, v.to_f64()))).collect()
}

pub fn duke_window(lo: i64, hi: i64, precision: usize) -> Result<DukeWindow> {
    let v = duke_series(lo, hi, precision)?;
    let n = v.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] has fewer than two fundamental discriminants")));
    }
    let mean = v.iter().map(|x| x.1).sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x.1 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(DukeWindow { lo, hi, count: n, mean, std_err: (var / n as f64).sqrt() })
}

/// Height of the horizontal cut of the fundamental domain.
pub const CUT_HEIGHT: f64 = 2.0;

/// Numerical value and error of a regularized average.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageResult {
    pub value: f64,
    pub err: f64,
}

/// `(3/pi)` times the integral of `Re f` over `|x| <= 1/2, |z| >= 1, y <= Y`
/// against `dx dy / y^2`.
fn compact_integral(poly: &crate::qexp::JPoly, tol: f64) -> Result<(f64, f64)> {
    let coeffs: Vec<f64> = poly.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let f = |z: Complex64| -> f64 {
        let j = j_f64(z);
        coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * j + c).re
    };
    let mut inner_err = 0.0f64;
    let mut inner_ok = true;
    // the integrand is even in x, so integrate over [0, 1/2] and double
    let outer = adaptive(
        |x| {
            let y0 = (1.0 - x * x).sqrt();
            let r = adaptive(|y| f(Complex64::new(x, y)) / (y * y), y0, CUT_HEIGHT, tol * 0.1, 0.0, 400);
            inner_err = inner_err.max(r.err);
            inner_ok &= r.converged;
            r.value
        },
        0.0,
        0.5,
        tol * 0.5,
        0.0,
        400,
    );
    if !outer.converged || !inner_ok {
        return Err(Error::ToleranceNotMet(format!("quadrature error {:.3e}", outer.err)));
    }
    let scale = 2.0 * 3.0 / std::f64::consts::PI;
    Ok((scale * outer.value, scale * (outer.err + 0.5 * inner_err)))
}

/// The regularized average `(3/pi) int^reg f dmu` of a polynomial in `j`.
///
/// For `f` with vanishing constant term the part above `y = Y` integrates to
/// zero, so only the compact part is computed; the constant function gets
/// its exact cusp contribution `(3/pi) / Y`. `tol` is the absolute quadrature
/// tolerance.
pub fn regularized_average(f: &FSpec, tol: f64) -> Result<AverageResult> {
    let FSpec::Poly { poly, .. } = f else {
        return Err(Error::InvalidArgument("regularized averages are implemented for polynomials in j".into()));
    };
    let a0 = f.q_series(1)?.coeff_int(0)?;
    let is_one = poly.coeffs.len() == 1;
    if !is_one && !num_traits::Zero::is_zero(&a0) {
        return Err(Error::NonzeroConstant(crate::qexp::rational_string(&a0)));
    }
    if is_one {
        let c = poly.coeffs[0].to_f64().unwrap_or(f64::NAN);
        let (v, e) = compact_integral(poly, tol)?;
        return Ok(AverageResult { value: v + c * 3.0 / (std::f64::consts::PI * CUT_HEIGHT), err: e });
    }
    let (value, err) = compact_integral(poly, tol)?;
    Ok(AverageResult { value, err })
}

/// `beta(s) = int_1^inf t^(-3/2) e^(-s t) dt`, computed as
/// `2 int_0^1 e^(-s / w^2) dw` by tanh-sinh quadrature.
pub fn beta_integral(s: &RealHP, precision: usize) -> Result<RealHP> {
    if s.is_negative() {
        return Err(Error::InvalidArgument("beta(s) needs s >= 0".into()));
    }
    if s.abs_f64() == 0.0 {
        return Ok(RealHP::from_i64(2, precision).with_extra_err(s.err()));
    }
    let prec = precision + 32;
    let cutoff = (prec as f64) * std::f64::consts::LN_2 + 64.0;
    let sf = s.to_f64();
    let v = tanh_sinh_unit(
        |w| {
            let w2 = w.mul(w);
            if sf / w2.to_f64() > cutoff {
                RealHP::zero(prec)
            } else {
                s.div(&w2).neg().exp()
            }
        },
        prec,
        16,
    )
    .ok_or_else(|| Error::PrecisionUnachievable(format!("beta({sf}) quadrature did not settle")))?;
    // values cut to zero are below e^-cutoff
    let v = v.mul_i64(2).with_extra_err(2.0 * (-cutoff).exp());
    if v.err() > v.abs_f64() * 2f64.powi(-(precision as i32)) + 2f64.powi(-(precision as i32)) {
        return Err(Error::PrecisionUnachievable(format!("beta({sf}): error bound {:.3e}", v.err())));
    }
    Ok(v)
}

/// [`beta_integral`] in double precision.
pub fn beta_f64(s: f64) -> f64 {
    beta_integral(&RealHP::from_f64(s, 0.0, 64), 53).map(|v| v.to_f64()).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_formula_first_terms() {
        let v = exact_formula_tj(3, 4, 128).unwrap().to_f64();
        let expect = -8.0 - 2.0 * (std::f64::consts::PI * 3f64.sqrt()).sinh();
        assert!((v - expect).abs() < 1e-10);
        assert!((v + 238.76).abs() < 0.01);
        let v = exact_formula_tj(4, 4, 128).unwrap().to_f64();
        assert!((v - (-12.0 + 2.0 * (2.0 * std::f64::consts::PI).sinh())).abs() < 1e-10);
        assert!(exact_formula_tj(3, 6, 64).is_err());
    }

    #[test]
    fn exact_formula_moves_toward_trace() {
        let far = (exact_formula_tj(3, 4, 128).unwrap().to_f64() + 248.0).abs();
        let near = (exact_formula_tj(3, 2000, 128).unwrap().to_f64() + 248.0).abs();
        assert!(near < far, "{near} {far}");
    }

    #[test]
    fn residual_examples() {
        let r = asymptotic_residual(3, 128).unwrap().to_f64();
        assert!((r - (-248.0 + (std::f64::consts::PI * 3f64.sqrt()).exp())).abs() < 1e-9);
        assert!((r + 17.2).abs() < 0.1);
        let r = asymptotic_residual(4, 128).unwrap().to_f64();
        assert!((r + 43.5).abs() < 0.1);
    }

    #[test]
    fn duke_small_cases() {
        assert!((duke_statistic(3, 128).unwrap().to_f64() + 744.0).abs() < 1e-12);
        assert!((duke_statistic(4, 128).unwrap().to_f64() - 984.0).abs() < 1e-12);
    }

    #[test]
    fn duke_matches_trace_route() {
        // for moderate D compare with the trace minus the explicit polar terms
        for d in [23i64, 47, 71, 104, 163] {
            let t = trace(&FSpec::big_j(), d, 1, None).unwrap().value_numeric.to_f64();
            let mut polar = 0.0;
            for f in enumerate_reduced(d) {
                let (x, y) = f.alpha_f64();
                if y > 1.0 {
                    // e(-alpha) = e^(2 pi y) e^(-2 pi i x)
                    polar += (2.0 * std::f64::consts::PI * y).exp() * (2.0 * std::f64::consts::PI * x).cos();
                }
            }
            let h = hurwitz(d);
            let expect = (t - polar) / (*h.numer() as f64 / *h.denom() as f64);
            let v = duke_statistic(d, 128).unwrap().to_f64();
            assert!((v - expect).abs() < 1e-6 * expect.abs().max(1.0) * (2.0 * std::f64::consts::PI * (d as f64).sqrt() / 2.0).exp() / 1e3, "D={d}: {v} vs {expect}");
        }
    }

    #[test]
    fn average_of_one() {
        let r = regularized_average(&FSpec::one(), 1e-9).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn average_rejects_constant_term() {
        assert!(matches!(regularized_average(&FSpec::j(), 1e-6), Err(Error::NonzeroConstant(_))));
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_integral(&RealHP::zero(64), 64).unwrap().to_f64(), 2.0);
        for s in [0.01f64, 0.5, 1.0, 3.0, 20.0] {
            let b = beta_integral(&RealHP::from_f64(s, 0.0, 128), 100).unwrap().to_f64();
            assert!(b <= (-s).exp() / s);
            // 2 e^-s - 2 sqrt(pi s) erfc(sqrt s)
            if s > 3.0 {
                // statrs erfc drifts to 1e-9 relative this far into the tail
                continue;
            }
            let closed = 2.0 * (-s).exp() - 2.0 * (std::f64::consts::PI * s).sqrt() * statrs::function::erf::erfc(s.sqrt());
            assert!((b - closed).abs() < 1e-9 * closed.abs(), "s={s}: {b} vs {closed}");
        }
        // 2 e^-s - 2 sqrt(s) (sqrt(pi) - gamma(1/2, s)) with the lower incomplete
        // gamma from its series s^(1/2) e^-s sum s^k / ((1/2)(3/2)...(k+1/2))
        let prec = 256;
        for s in [1i64, 7, 20] {
            let sr = RealHP::from_i64(s, prec);
            let mut term = RealHP::from_i64(2, prec);
            let mut sum = term.clone();
            for k in 1..400 {
                term = term.mul(&sr).mul_i64(2).div(&RealHP::from_i64(2 * k + 1, prec));
                sum = sum.add(&term);
            }
            let emx = sr.neg().exp();
            let lower = sr.sqrt().mul(&emx).mul(&sum);
            let upper = RealHP::pi(prec).sqrt().sub(&lower);
            let closed = emx.mul_i64(2).sub(&sr.sqrt().mul_i64(2).mul(&upper));
            let b = beta_integral(&sr, 150).unwrap();
            let d = b.sub(&closed).abs_f64();
            assert!(d < 1e-40 * closed.abs_f64(), "s={s}: {d:e}");
        }
        assert!(beta_integral(&RealHP::from_i64(-1, 64), 64).is_err());
    }
}
