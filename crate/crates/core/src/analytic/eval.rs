//! Values of modular functions at points of the upper half-plane.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::hp::{ComplexHP, RealHP, MIN_PRECISION};
use crate::error::{Error, Result};
use crate::qexp::{eta_quotient, faber, j_series, JPoly, QSeries};
use crate::qform::{is_prime, reduce_with_matrix, Mat2, QuadForm};

/// Primes `p` for which `Gamma_0^*(p)` has genus zero and a Hauptmodul is built in.
pub const HAUPTMODUL_PRIMES: [u64; 5] = [2, 3, 5, 7, 13];

const GUARD_BITS: usize = 32;
const HAUPTMODUL_TERMS: i64 = 600;

/// A modular function: a polynomial in `j` (level one) or an exact q-expansion
/// of a function for `Gamma_0^*(p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FSpec {
    Poly { name: String, poly: JPoly },
    Series { name: String, p: u64, series: QSeries },
}

impl FSpec {
    pub fn one() -> FSpec {
        FSpec::Poly { name: "1".into(), poly: JPoly { coeffs: vec![BigRational::one()] } }
    }

    pub fn j() -> FSpec {
        FSpec::Poly { name: "j".into(), poly: JPoly::j() }
    }

    pub fn big_j() -> FSpec {
        FSpec::Poly { name: "J".into(), poly: JPoly::big_j() }
    }

    /// `J_m = q^-m + O(q)`; `J_1 = J`.
    pub fn faber(m: u32) -> Result<FSpec> {
        let f = faber(m, 1)?;
        let name = if m == 1 { "J".to_string() } else { format!("J{m}") };
        Ok(FSpec::Poly { name, poly: f.poly })
    }

    /// Normalized Hauptmodul `T_p = q^-1 + O(q)` of `Gamma_0^*(p)`.
    pub fn hauptmodul(p: u64) -> Result<FSpec> {
        if !HAUPTMODUL_PRIMES.contains(&p) {
            return Err(Error::InvalidArgument(format!("no built-in Hauptmodul for p = {p}")));
        }
        let r = (24 / (p - 1)) as i64;
        let trunc = Rational64::from_integer(HAUPTMODUL_TERMS);
        let t = eta_quotient(&[(1, r), (p as u32, -r)], trunc)?;
        let inv = eta_quotient(&[(1, -r), (p as u32, r)], trunc)?;
        let c = BigInt::from(p).pow((r / 2) as u32);
        let series = t.add(&inv.scale(&BigRational::from_integer(c))).add_const(&BigRational::from_integer(r.into()));
        Ok(FSpec::Series { name: format!("T{p}"), p, series: series.with_denom(1) })
    }

    /// Parses `1`, `j`, `J`, `J<m>` or `T<p>`.
    pub fn parse(s: &str) -> Result<FSpec> {
        match s {
            "1" => Ok(FSpec::one()),
            "j" => Ok(FSpec::j()),
            "J" | "J1" => Ok(FSpec::big_j()),
            _ => {
                let bad = || Error::InvalidArgument(format!("unknown function {s:?}"));
                if let Some(m) = s.strip_prefix('J') {
                    FSpec::faber(m.parse().map_err(|_| bad())?)
                } else if let Some(p) = s.strip_prefix('T') {
                    FSpec::hauptmodul(p.parse().map_err(|_| bad())?)
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            FSpec::Poly { name, .. } | FSpec::Series { name, .. } => name,
        }
    }

    pub fn level(&self) -> u64 {
        match self {
            FSpec::Poly { .. } => 1,
            FSpec::Series { p, .. } => *p,
        }
    }

    /// Order of the pole at the cusp.
    pub fn pole_order(&self) -> u32 {
        match self {
            FSpec::Poly { poly, .. } => poly.degree() as u32,
            FSpec::Series { series, .. } => {
                series.valuation().map_or(0, |v| (-v.to_integer()).max(0) as u32)
            }
        }
    }

    /// The q-expansion known below `q^trunc`.
    pub fn q_series(&self, trunc: i64) -> Result<QSeries> {
        match self {
            FSpec::Poly { poly, .. } => {
                let m = poly.degree() as i64;
                let j = j_series(trunc + m)?;
                let t = Rational64::from_integer(trunc + m);
                let from = |c: &BigRational| QSeries::monomial(c.clone(), Rational64::zero(), t);
                let s = poly.eval_with(&j, from, |a, b| a.add(b), |a, b| a.mul(b));
                Ok(s.truncate(Rational64::from_integer(trunc)))
            }
            FSpec::Series { series, .. } => {
                if Rational64::from_integer(trunc) > series.trunc() {
                    return Err(Error::Truncated { exponent: trunc.to_string(), trunc: series.trunc().to_string() });
                }
                Ok(series.truncate(Rational64::from_integer(trunc)))
            }
        }
    }

    /// Least common denominator of the coefficients.
    pub fn coefficient_lcm(&self) -> BigInt {
        let denoms: Vec<BigInt> = match self {
            FSpec::Poly { poly, .. } => poly.coeffs.iter().map(|c| c.denom().clone()).collect(),
            FSpec::Series { series, .. } => series.terms().map(|(_, c)| c.denom().clone()).collect(),
        };
        denoms.iter().fold(BigInt::one(), |a, b| a.lcm(b))
    }

    /// `log2` of the largest coefficient magnitude, at least 0.
    pub(crate) fn coefficient_bits(&self) -> usize {
        match self {
            FSpec::Poly { poly, .. } => poly.coeffs.iter().map(|c| c.abs().ceil().to_integer().bits() as usize).max().unwrap_or(0),
            FSpec::Series { .. } => 0,
        }
    }
}

impl std::fmt::Display for FSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn two_pi_i_tau(tau: &ComplexHP, prec: usize) -> ComplexHP {
    let two_pi = RealHP::pi(prec).mul_i64(2);
    ComplexHP::from_parts(tau.im().mul(&two_pi).neg(), tau.re().mul(&two_pi))
}

fn check_height(tau: &ComplexHP, min: f64) -> Result<()> {
    let y = tau.im().to_f64();
    if !(y >= min) {
        return Err(Error::InvalidArgument(format!("Im(tau) = {y} is below {min}; reduce the point first")));
    }
    Ok(())
}

/// `j(tau) = E_4^3 / Delta` with `E_4` as a Lambert series and `Delta` as the
/// product `q prod (1 - q^n)^24`, truncated once the certified tails fall
/// below `2^-prec` relative.
pub(crate) fn j_hp(tau: &ComplexHP, prec: usize) -> ComplexHP {
    let q = two_pi_i_tau(tau, prec).exp();
    let r = q.abs_f64() * (1.0 + 1e-12);
    let eps = 2f64.powi(-(prec as i32) - 8);
    let one = ComplexHP::one(prec);
    let mut e4 = ComplexHP::zero(prec);
    let mut prod = ComplexHP::one(prec);
    let mut qn = one.clone();
    let mut n = 0u64;
    let (e4_tail, prod_tail) = loop {
        n += 1;
        qn = qn.mul(&q);
        let om = one.sub(&qn);
        let n3 = RealHP::from_i64((n * n * n) as i64, prec);
        e4 = e4.add(&qn.scale(&n3).div(&om));
        prod = prod.mul(&om);
        let rn1 = r.powi(n as i32 + 1);
        let m = (n + 1) as f64;
        let e4_tail = 240.0 * 2.0 * m * m * m * rn1 / ((1.0 - r) * (1.0 - r));
        let prod_tail = 4.0 * rn1;
        if (e4_tail < eps && prod_tail < eps) || rn1 == 0.0 {
            break (e4_tail, prod_tail);
        }
    };
    let e4 = e4.scale(&RealHP::from_i64(240, prec)).add(&one).with_extra_err(e4_tail);
    let p24 = prod.powi(24);
    // (1 + d)^24 - 1 <= 25 |d| for |d| < 1/100
    let p24_err = p24.abs_f64() * 25.0 * prod_tail;
    let delta = p24.with_extra_err(p24_err).mul(&q);
    e4.powi(3).div(&delta)
}

/// `j(tau)` in double precision by the same product formulas.
pub fn j_f64(tau: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau).exp();
    let mut e4 = Complex64::zero();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..200u32 {
        qn *= q;
        let om = Complex64::new(1.0, 0.0) - qn;
        e4 += qn * (n as f64).powi(3) / om;
        prod *= om;
        if qn.norm() * (n as f64).powi(3) < 1e-18 {
            break;
        }
    }
    let e4 = 1.0 + 240.0 * e4;
    e4 * e4 * e4 / (q * prod.powi(24))
}

fn rat_hp(c: &BigRational, prec: usize) -> ComplexHP {
    ComplexHP::from_real(RealHP::from_rational(c, prec))
}

fn poly_hp(poly: &JPoly, x: &ComplexHP, prec: usize) -> ComplexHP {
    poly.eval_with(x, |c| rat_hp(c, prec), |a, b| a.add(b), |a, b| a.mul(b))
}

/// Sum of `|c_k| |x|^k`, the scale against which polynomial errors are judged.
fn poly_scale(poly: &JPoly, x_abs: f64) -> f64 {
    poly.coeffs.iter().rev().fold(0.0, |acc, c| acc * x_abs + c.to_f64().unwrap_or(f64::MAX).abs())
}

/// `sum a_n q^n` over the stored coefficients by Horner's rule, with the
/// magnitude of the last retained term added as a tail estimate.
pub(crate) fn series_hp(series: &QSeries, q: &ComplexHP, prec: usize) -> ComplexHP {
    let s = series.with_denom(1);
    let terms: Vec<(i64, BigRational)> = s.terms().map(|(e, c)| (e.to_integer(), c.clone())).collect();
    let Some(lo) = terms.first().map(|t| t.0) else {
        return ComplexHP::zero(prec);
    };
    let hi = s.trunc().to_integer();
    let mut dense = vec![BigRational::zero(); (hi - lo) as usize];
    for (e, c) in &terms {
        dense[(e - lo) as usize] = c.clone();
    }
    let mut acc = ComplexHP::zero(prec);
    for c in dense.iter().rev() {
        acc = acc.mul(q).add(&rat_hp(c, prec));
    }
    let r = q.abs_f64();
    let lead = if lo >= 0 { q.powi(lo as u32) } else { ComplexHP::one(prec).div(&q.powi((-lo) as u32)) };
    let value = acc.mul(&lead);
    let last = terms.last().expect("nonempty");
    let tail = last.1.to_f64().unwrap_or(f64::MAX).abs() * (last.0 as f64 * r.ln()).exp() * 4.0;
    value.with_extra_err(tail)
}

/// `f(tau)` with certified error (heuristic tail for stored q-expansions).
///
/// Requires `Im(tau) >= sqrt(3)/2` for polynomials in `j`; stored series are
/// evaluated where given, so callers should move `tau` to a point of maximal
/// height first. Fails with [`Error::PrecisionUnachievable`] when the error
/// bound exceeds `2^-precision` relative to the size of the computation.
pub fn eval_modular(f: &FSpec, tau: &ComplexHP, precision: usize) -> Result<ComplexHP> {
    if precision < MIN_PRECISION {
        return Err(Error::PrecisionTooLow(precision, MIN_PRECISION));
    }
    let prec = precision + GUARD_BITS;
    let tau = ComplexHP::from_parts(tau.re(), tau.im()).with_extra_err(tau.err());
    let (value, scale) = match f {
        FSpec::Poly { poly, .. } => {
            check_height(&tau, 3f64.sqrt() / 2.0 - 1e-12)?;
            let j = j_hp(&tau, prec);
            let v = poly_hp(poly, &j, prec);
            let s = poly_scale(poly, j.abs_f64()).max(1.0);
            (v, s)
        }
        FSpec::Series { series, .. } => {
            check_height(&tau, 0.01)?;
            let q = two_pi_i_tau(&tau, prec).exp();
            let v = series_hp(series, &q, prec);
            let s = v.abs_f64().max(1.0);
            (v, s)
        }
    };
    let allowed = scale * 2f64.powi(-(precision as i32));
    if !(value.err() <= allowed) {
        return Err(Error::PrecisionUnachievable(format!(
            "{f} at tau: error bound {:.3e} exceeds {:.3e}",
            value.err(),
            allowed
        )));
    }
    Ok(value)
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Smallest `F(x, y)` over primitive `(x, y)` with `p | y`, and the
/// `Gamma_0(p)` matrix realizing it.
fn min_in_gamma0_orbit(form: &QuadForm, p: i64) -> (i64, Mat2) {
    let (a, b, c) = (form.a, form.b, form.c);
    let d = form.big_d();
    // F(x, p t) >= D p^2 t^2 / (4a), so |t| <= 2a / (p sqrt D)
    let tmax = ((2 * a) as f64 / (p as f64 * (d as f64).sqrt())).floor() as i64 + 1;
    let mut best = (a, Mat2::IDENTITY);
    for t in -tmax..=tmax {
        let y = p * t;
        if y == 0 {
            continue;
        }
        // a x^2 + b x y + c y^2 <= best: solve for x around the vertex
        let xc = -(b * y) as f64 / (2 * a) as f64;
        let disc = (best.0 as f64 - (d as f64) * (y * y) as f64 / (4 * a) as f64) / a as f64;
        if disc < 0.0 {
            continue;
        }
        let w = disc.sqrt() + 1.0;
        for x in (xc - w).floor() as i64..=(xc + w).ceil() as i64 {
            let v = a * x * x + b * x * y + c * y * y;
            if v < best.0 && x.gcd(&y) == 1 {
                let (_, s, u) = ext_gcd(x, y);
                // s x + u y = 1, so [[x, -u], [y, s]] has determinant 1
                best = (v, Mat2([[x, -u], [y, s]]));
            }
        }
    }
    best
}

/// A form in the `Gamma_0^*(p)` orbit of `form` whose CM point has maximal
/// height, with `b` normalized to `(-a, a]`.
pub fn highest_representative(form: &QuadForm, p: u64) -> Result<QuadForm> {
    if p == 1 {
        return Ok(reduce_with_matrix(form)?.0);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pi = p as i64;
    if form.a % pi != 0 {
        return Err(Error::InvalidArgument(format!("{form} does not have a divisible by {p}")));
    }
    let w = crate::qform::fricke(form, p);
    let (va, ga) = min_in_gamma0_orbit(form, pi);
    let (vb, gb) = min_in_gamma0_orbit(&w, pi);
    let g = if va <= vb { form.act(&ga) } else { w.act(&gb) };
    // translate b into (-a, a]
    let k = (g.a - g.b).div_euclid(2 * g.a);
    Ok(g.act(&Mat2([[1, k], [0, 1]])))
}

/// `f(alpha_Q)` for a form of discriminant `-D`, after moving `alpha_Q` to a
/// point of maximal height for the level of `f`.
pub fn eval_at_form(f: &FSpec, form: &QuadForm, precision: usize) -> Result<ComplexHP> {
    let rep = highest_representative(form, f.level())?;
    let prec = precision + GUARD_BITS;
    let pt = crate::qform::cm_point(&rep, prec)?;
    eval_modular(f, &pt.value, precision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(x: (i64, i64), y2: i64, prec: usize) -> ComplexHP {
        // x.0/x.1 + i sqrt(y2)/x.1
        let re = RealHP::from_ratio(x.0, x.1, prec);
        let im = RealHP::from_i64(y2, prec).sqrt().div(&RealHP::from_i64(x.1, prec));
        ComplexHP::from_parts(re, im)
    }

    #[test]
    fn j_at_rho_and_i() {
        for prec in [100, 300] {
            let rho = tau((-1, 2), 3, prec + 40);
            let v = eval_modular(&FSpec::j(), &rho, prec).unwrap();
            assert!(v.abs_f64() < 1e-20, "{v}");
            let i = tau((0, 1), 1, prec + 40);
            let v = eval_modular(&FSpec::j(), &i, prec).unwrap();
            let d = v.sub(&ComplexHP::from_real(RealHP::from_i64(1728, prec))).abs_f64();
            assert!(d < 1e-20 && d <= v.err() + 1e-25);
        }
    }

    #[test]
    fn j_is_weight_zero_under_s() {
        // j(i sqrt 2) = 8000 and j(1/2 + i sqrt 7 / 2) = -3375
        let v = eval_modular(&FSpec::j(), &tau((0, 1), 2, 200), 150).unwrap();
        assert!((v.re().to_f64() - 8000.0).abs() < 1e-30);
        let v = eval_modular(&FSpec::j(), &tau((1, 2), 7, 200), 150).unwrap();
        assert!((v.re().to_f64() + 3375.0).abs() < 1e-30);
    }

    #[test]
    fn big_j_leading_term() {
        let prec = 200;
        let t = ComplexHP::from_parts(RealHP::zero(prec), RealHP::from_i64(10, prec));
        let v = eval_modular(&FSpec::big_j(), &t, 120).unwrap();
        let lead = RealHP::pi(prec).mul_i64(20).exp();
        let d = v.re().sub(&lead).to_f64();
        assert!(d.abs() < 1.0, "{d}");
    }

    #[test]
    fn low_points_rejected() {
        let t = ComplexHP::from_f64(0.0, 0.5, 0.0, 100);
        assert!(matches!(eval_modular(&FSpec::j(), &t, 64), Err(Error::InvalidArgument(_))));
        assert_eq!(eval_modular(&FSpec::j(), &t, 8).unwrap_err(), Error::PrecisionTooLow(8, MIN_PRECISION));
    }

    #[test]
    fn precision_shortfall_reported() {
        // an input known only to double precision cannot give 200 good bits
        let t = ComplexHP::from_f64(0.1, 1.2, 1e-16, 300);
        assert!(matches!(eval_modular(&FSpec::j(), &t, 200), Err(Error::PrecisionUnachievable(_))));
    }

    #[test]
    fn f64_matches_hp() {
        for (x, y) in [(0.1, 0.9), (-0.4, 1.3), (0.5, 2.0)] {
            let a = j_f64(Complex64::new(x, y));
            let b = eval_modular(&FSpec::j(), &ComplexHP::from_f64(x, y, 0.0, 120), 64).unwrap().to_f64();
            assert!((a - Complex64::new(b.0, b.1)).norm() < 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(FSpec::parse("J").unwrap(), FSpec::big_j());
        assert_eq!(FSpec::parse("J2").unwrap().pole_order(), 2);
        assert_eq!(FSpec::parse("T5").unwrap().level(), 5);
        assert!(FSpec::parse("T4").is_err());
        assert!(FSpec::parse("x").is_err());
        assert_eq!(FSpec::parse("J3").unwrap().name(), "J3");
    }

    #[test]
    fn hauptmodul_shape() {
        for p in HAUPTMODUL_PRIMES {
            let f = FSpec::hauptmodul(p).unwrap();
            let s = f.q_series(5).unwrap();
            assert_eq!(s.coeff_int(-1).unwrap(), BigRational::one());
            assert!(s.coeff_int(0).unwrap().is_zero());
            assert!(s.is_integral());
        }
        // T_2 = q^-1 + 4372 q + 96256 q^2 + 1240002 q^3 + ...
        let s = FSpec::hauptmodul(2).unwrap().q_series(4).unwrap();
        for (n, c) in [(1, 4372), (2, 96256), (3, 1240002)] {
            assert_eq!(s.coeff_int(n).unwrap(), BigRational::from_integer(c.into()));
        }
    }

    #[test]
    fn hauptmodul_fricke_invariant() {
        // T_p(tau) = T_p(-1 / (p tau)) at a point away from the fixed circle
        for p in HAUPTMODUL_PRIMES {
            let prec = 160;
            let f = FSpec::hauptmodul(p).unwrap();
            let t = ComplexHP::from_f64(0.1, 0.6 / (p as f64).sqrt(), 0.0, prec);
            let w = ComplexHP::one(prec).neg().div(&t.scale(&RealHP::from_i64(p as i64, prec)));
            let a = eval_modular(&f, &t, 60).unwrap();
            let b = eval_modular(&f, &w, 60).unwrap();
            assert!(a.sub(&b).abs_f64() < 1e-12 * a.abs_f64().max(1.0), "p={p}");
        }
    }

    #[test]
    fn highest_representative_raises_height() {
        for p in [2u64, 3, 5, 7, 13] {
            for d in [3i64, 4, 7, 8, 11, 15, 19, 20, 23, 24, 35, 40, 51, 52] {
                for (_, form, _) in crate::qform::gamma0_classes(d, p).unwrap() {
                    let h = highest_representative(&form, p).unwrap();
                    assert_eq!(h.a % p as i64, 0);
                    assert_eq!(h.big_d(), d);
                    assert!(h.a <= form.a);
                    assert!(-h.a < h.b && h.b <= h.a);
                    // same Gamma_0^*(p) orbit
                    let id = crate::qform::class_id(&h, p).unwrap();
                    let ids = [crate::qform::class_id(&form, p).unwrap(), crate::qform::class_id(&crate::qform::fricke(&form, p), p).unwrap()];
                    assert!(ids.contains(&id));
                }
            }
        }
    }

    #[test]
    fn poly_series_matches_evaluation() {
        let f = FSpec::faber(2).unwrap();
        let s = f.q_series(30).unwrap();
        let prec = 128;
        let t = ComplexHP::from_f64(0.2, 1.1, 0.0, prec);
        let q = two_pi_i_tau(&t, prec).exp();
        let a = series_hp(&s, &q, prec);
        let b = eval_modular(&f, &t, 96).unwrap();
        assert!(a.sub(&b).abs_f64() < 1e-20);
    }
}
