//! Truncated Laurent series in fractional powers of `q` with exact rational
//! coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Laurent series `sum c_k q^(k/denom)` known exactly for all exponents
/// strictly below `trunc`.
///
/// Coefficients are stored densely from index `val` (in units of `1/denom`)
/// up to `trunc`; everything below `val` is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    denom: u32,
    val: i64,
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

impl QSeries {
    /// Zero series with exponents in `(1/denom) Z`, known below `trunc`
    /// (given in units of `1/denom`).
    pub fn zero_raw(denom: u32, trunc: i64) -> Self {
        QSeries { denom, val: trunc, coeffs: Vec::new() }
    }

    /// Builds a series from `(exponent numerator, coefficient)` pairs. All
    /// indices are in units of `1/denom`; indices at or above `trunc` are dropped.
    pub fn from_raw_terms(denom: u32, trunc: i64, terms: impl IntoIterator<Item = (i64, BigRational)>) -> Self {
        let terms: Vec<(i64, BigRational)> = terms.into_iter().filter(|(k, _)| *k < trunc).collect();
        let val = terms.iter().map(|(k, _)| *k).min().unwrap_or(trunc).min(trunc);
        let mut coeffs = vec![BigRational::zero(); (trunc - val) as usize];
        for (k, c) in terms {
            coeffs[(k - val) as usize] += c;
        }
        QSeries { denom, val, coeffs }
    }

    /// Integer-exponent series from integer coefficients starting at `val`.
    pub fn from_int_coeffs(val: i64, coeffs: Vec<BigInt>) -> Self {
        QSeries { denom: 1, val, coeffs: coeffs.into_iter().map(BigRational::from_integer).collect() }
    }

    /// `c q^e`, known below `trunc`.
    pub fn monomial(c: BigRational, e: Rational64, trunc: Rational64) -> Self {
        let denom = lcm(*e.denom() as u32, *trunc.denom() as u32);
        let k = e.numer() * (denom as i64 / e.denom());
        let t = trunc.numer() * (denom as i64 / trunc.denom());
        QSeries::from_raw_terms(denom, t, [(k, c)])
    }

    pub fn one(trunc: Rational64) -> Self {
        QSeries::monomial(BigRational::one(), Rational64::from_integer(0), trunc)
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    /// Truncation bound: coefficients are known for exponents strictly below it.
    pub fn trunc(&self) -> Rational64 {
        Rational64::new(self.trunc_raw(), self.denom as i64)
    }

    fn trunc_raw(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    /// Exponent of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<Rational64> {
        self.first_nonzero().map(|k| Rational64::new(k, self.denom as i64))
    }

    fn first_nonzero(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.val + i as i64)
    }

    /// Coefficient of `q^e`. Asking at or beyond the truncation is an error.
    pub fn coeff(&self, e: Rational64) -> Result<BigRational> {
        if e >= self.trunc() {
            return Err(Error::Truncated { exponent: e.to_string(), trunc: self.trunc().to_string() });
        }
        let scaled = e * Rational64::from_integer(self.denom as i64);
        if !scaled.is_integer() {
            return Ok(BigRational::zero());
        }
        let k = scaled.to_integer();
        if k < self.val {
            return Ok(BigRational::zero());
        }
        Ok(self.coeffs[(k - self.val) as usize].clone())
    }

    /// Coefficient at an integral exponent.
    pub fn coeff_int(&self, n: i64) -> Result<BigRational> {
        self.coeff(Rational64::from_integer(n))
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Rational64, &BigRational)> + '_ {
        let d = self.denom as i64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (Rational64::new(self.val + i as i64, d), c))
    }

    /// Whether every known coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Re-expresses exponents with denominator `d`, a multiple of the current one.
    pub fn with_denom(&self, d: u32) -> QSeries {
        assert!(d.is_multiple_of(self.denom), "denominator {d} is not a multiple of {}", self.denom);
        let f = (d / self.denom) as i64;
        if f == 1 {
            return self.clone();
        }
        let val = self.val * f;
        let trunc = self.trunc_raw() * f;
        let mut coeffs = vec![BigRational::zero(); (trunc - val) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * f as usize] = c.clone();
        }
        QSeries { denom: d, val, coeffs }
    }

    /// Smallest denominator able to hold every stored exponent and the truncation.
    pub fn normalized(&self) -> QSeries {
        let mut g = (self.denom as i64).gcd(&self.trunc_raw());
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                g = g.gcd(&(self.val + i as i64));
            }
        }
        if g <= 1 {
            return self.clone();
        }
        let nd = self.denom as i64 / g;
        let trunc = self.trunc_raw() / g;
        let terms: Vec<(i64, BigRational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| ((self.val + i as i64) / g, c.clone()))
            .collect();
        QSeries::from_raw_terms(nd as u32, trunc, terms)
    }

    /// Drops everything at or above `t`.
    pub fn truncate(&self, t: Rational64) -> QSeries {
        if t >= self.trunc() {
            return self.clone();
        }
        let d = lcm(self.denom, *t.denom() as u32);
        let s = self.with_denom(d);
        let tr = t.numer() * (d as i64 / t.denom());
        let keep = (tr - s.val).max(0) as usize;
        let mut coeffs = s.coeffs;
        coeffs.truncate(keep);
        let val = s.val.min(tr);
        QSeries { denom: d, val, coeffs }.normalized()
    }

    fn common(&self, o: &QSeries) -> (QSeries, QSeries) {
        let d = lcm(self.denom, o.denom);
        (self.with_denom(d), o.with_denom(d))
    }

    pub fn add(&self, o: &QSeries) -> QSeries {
        let (a, b) = self.common(o);
        let trunc = a.trunc_raw().min(b.trunc_raw());
        let val = a.val.min(b.val).min(trunc);
        let mut coeffs = vec![BigRational::zero(); (trunc - val) as usize];
        for s in [&a, &b] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = s.val + i as i64;
                if k < trunc {
                    coeffs[(k - val) as usize] += c;
                }
            }
        }
        QSeries { denom: a.denom, val, coeffs }.normalized()
    }

    pub fn neg(&self) -> QSeries {
        QSeries { denom: self.denom, val: self.val, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &QSeries) -> QSeries {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        QSeries { denom: self.denom, val: self.val, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_int(&self, c: i64) -> QSeries {
        self.scale(&rat(c))
    }

    /// Adds a constant.
    pub fn add_const(&self, c: &BigRational) -> QSeries {
        self.add(&QSeries::monomial(c.clone(), Rational64::from_integer(0), self.trunc()))
    }

    /// Multiplication by `q^e`.
    pub fn shift(&self, e: Rational64) -> QSeries {
        let d = lcm(self.denom, *e.denom() as u32);
        let mut s = self.with_denom(d);
        s.val += e.numer() * (d as i64 / e.denom());
        s.normalized()
    }

    /// Product; validity is `min(v_a + t_b, v_b + t_a)` with `v` the true valuations.
    pub fn mul(&self, o: &QSeries) -> QSeries {
        let (a, b) = self.common(o);
        let (Some(va), Some(vb)) = (a.first_nonzero(), b.first_nonzero()) else {
            // a zero operand: result is zero, known as far as the other factor allows
            let t = match (a.first_nonzero(), b.first_nonzero()) {
                (None, None) => a.trunc_raw() + b.trunc_raw(),
                (Some(v), None) => v + b.trunc_raw(),
                (None, Some(v)) => v + a.trunc_raw(),
                _ => unreachable!(),
            };
            return QSeries::zero_raw(a.denom, t);
        };
        let trunc = (va + b.trunc_raw()).min(vb + a.trunc_raw());
        let val = va + vb;
        let n = (trunc - val).max(0) as usize;
        let ao = (va - a.val) as usize;
        let bo = (vb - b.val) as usize;
        let coeffs = if a.is_integral() && b.is_integral() {
            let ai: Vec<BigInt> = a.coeffs[ao..].iter().map(|c| c.numer().clone()).collect();
            let bi: Vec<BigInt> = b.coeffs[bo..].iter().map(|c| c.numer().clone()).collect();
            convolve_int(&ai, &bi, n).into_iter().map(BigRational::from_integer).collect()
        } else {
            let mut out = vec![BigRational::zero(); n];
            for (i, x) in a.coeffs[ao..].iter().enumerate().take(n) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b.coeffs[bo..].iter().enumerate().take(n - i) {
                    if !y.is_zero() {
                        out[i + j] += x * y;
                    }
                }
            }
            out
        };
        QSeries { denom: a.denom, val, coeffs }.normalized()
    }

    /// Multiplicative inverse; needs a nonzero leading coefficient.
    pub fn inv(&self) -> Result<QSeries> {
        let v = self.first_nonzero().ok_or(Error::ZeroLeadingTerm)?;
        let lead = self.coeffs[(v - self.val) as usize].clone();
        let rel = (self.trunc_raw() - v) as usize;
        let b: Vec<BigRational> = self.coeffs[(v - self.val) as usize..].iter().map(|c| c / &lead).collect();
        let mut r: Vec<BigRational> = Vec::with_capacity(rel);
        let integral = b.iter().all(|c| c.is_integer());
        if integral {
            let bi: Vec<BigInt> = b.iter().map(|c| c.numer().clone()).collect();
            let mut ri: Vec<BigInt> = Vec::with_capacity(rel);
            for n in 0..rel {
                if n == 0 {
                    ri.push(BigInt::one());
                    continue;
                }
                let mut s = BigInt::zero();
                for k in 1..=n {
                    if !bi[k].is_zero() {
                        s += &bi[k] * &ri[n - k];
                    }
                }
                ri.push(-s);
            }
            r.extend(ri.into_iter().map(BigRational::from_integer));
        } else {
            for n in 0..rel {
                if n == 0 {
                    r.push(BigRational::one());
                    continue;
                }
                let mut s = BigRational::zero();
                for k in 1..=n {
                    if !b[k].is_zero() {
                        s += &b[k] * &r[n - k];
                    }
                }
                r.push(-s);
            }
        }
        let inv_lead = lead.recip();
        let coeffs = r.into_iter().map(|c| c * &inv_lead).collect();
        Ok(QSeries { denom: self.denom, val: -v, coeffs }.normalized())
    }

    pub fn div(&self, o: &QSeries) -> Result<QSeries> {
        Ok(self.mul(&o.inv()?))
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn pow(&self, n: i64) -> Result<QSeries> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let v = self.valuation().unwrap_or(Rational64::from_integer(0));
        let rel = self.trunc() - v;
        let mut acc = QSeries::one(rel + v * Rational64::from_integer(n));
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Substitution `q -> q^n`.
    pub fn scale_q(&self, n: u32) -> QSeries {
        assert!(n >= 1);
        let f = n as i64;
        let val = self.val * f;
        let trunc = self.trunc_raw() * f;
        let mut coeffs = vec![BigRational::zero(); (trunc - val) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * n as usize] = c.clone();
        }
        QSeries { denom: self.denom, val, coeffs }.normalized()
    }

    /// Evaluates the known part at a complex `q`, given as f64 pair, for
    /// integer-exponent series.
    pub fn eval_f64(&self, q: num_complex::Complex64) -> num_complex::Complex64 {
        let s = self.normalized();
        assert_eq!(s.denom, 1, "eval_f64 needs integral exponents");
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        // Horner from the top
        for c in s.coeffs.iter().rev() {
            acc = acc * q + c.to_f64().unwrap_or(0.0);
        }
        acc * q.powi(s.val as i32)
    }

    /// Coefficients at integer exponents `start..end` as f64.
    pub fn int_coeffs_f64(&self, start: i64, end: i64) -> Result<Vec<f64>> {
        (start..end).map(|n| self.coeff_int(n).map(|c| c.to_f64().unwrap_or(f64::NAN))).collect()
    }

    pub fn to_json(&self) -> SeriesJson {
        let s = self.normalized();
        let terms = s
            .terms()
            .map(|(e, c)| {
                (
                    *e.numer(),
                    *e.denom(),
                    c.numer().to_string(),
                    c.denom().to_string(),
                )
            })
            .collect();
        SeriesJson { denom: s.denom, trunc: s.trunc().to_string(), terms }
    }

    pub fn from_json(j: &SeriesJson) -> Result<QSeries> {
        let bad = |m: &str| Error::InvalidArgument(format!("series json: {m}"));
        let trunc: Rational64 = parse_rational(&j.trunc).ok_or_else(|| bad("trunc"))?;
        let d = lcm(j.denom, *trunc.denom() as u32);
        let mut terms = BTreeMap::new();
        for (n, den, cn, cd) in &j.terms {
            if *den <= 0 || d as i64 % den != 0 {
                return Err(bad("exponent denominator"));
            }
            let k = n * (d as i64 / den);
            let c = BigRational::new(
                cn.parse::<BigInt>().map_err(|_| bad("coefficient"))?,
                cd.parse::<BigInt>().map_err(|_| bad("coefficient"))?,
            );
            terms.insert(k, c);
        }
        let t = trunc.numer() * (d as i64 / trunc.denom());
        Ok(QSeries::from_raw_terms(d, t, terms).normalized())
    }
}

/// Cache and interchange format: `{denom, trunc, terms: [[num, den, coeff_num, coeff_den], ...]}`.
///
/// Coefficient numerators and denominators are decimal strings since they
/// routinely exceed 64 bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub denom: u32,
    pub trunc: String,
    pub terms: Vec<(i64, i64, String, String)>,
}

pub(crate) fn parse_rational(s: &str) -> Option<Rational64> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            let n: i64 = n.trim().parse().ok()?;
            (d != 0).then(|| Rational64::new(n, d))
        }
        None => Some(Rational64::from_integer(s.trim().parse().ok()?)),
    }
}

fn convolve_int(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Renders an exact rational as `num/den`, or `num` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[allow(dead_code)]
pub(crate) fn is_negative(r: &BigRational) -> bool {
    r.is_negative()
}
