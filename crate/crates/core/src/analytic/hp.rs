//! Precision-tracked real and complex numbers.
//!
//! Values are `astro-float` numbers carried at a fixed mantissa budget together
//! with an absolute error bound that every operation propagates. The bound
//! includes the rounding of the operation itself (two ulps for field
//! operations, four for transcendental functions), so a final `err` certifies
//! `|computed - exact| <= err` up to the correctness of the underlying
//! primitives.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

/// Smallest mantissa budget accepted by constructors taking a precision.
pub const MIN_PRECISION: usize = 32;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Nearest f64 of a finite `BigFloat` (truncated mantissa, so within one f64 ulp).
pub(crate) fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (Some(words), Some(e)) = (x.mantissa_digits(), x.exponent()) else {
        return f64::NAN;
    };
    let top = *words.last().expect("nonempty mantissa");
    let second = if words.len() > 1 { words[words.len() - 2] } else { 0 };
    let m = top as f64 + second as f64 / 18446744073709551616.0;
    // split the scaling so neither factor under- or overflows early
    let sh = e - 64;
    let half = sh / 2;
    let v = m * 2f64.powi(half) * 2f64.powi(sh - half);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Exact conversion of the integral part of `x * 2^shift`, rounded to nearest.
fn big_round_to_int(x: &BigFloat) -> BigInt {
    if x.is_zero() {
        return BigInt::zero();
    }
    let words = x.mantissa_digits().expect("finite");
    let e = x.exponent().expect("finite") as i64;
    let mut limbs = Vec::with_capacity(words.len() * 2);
    for w in words {
        limbs.push(*w as u32);
        limbs.push((*w >> 32) as u32);
    }
    let m = BigUint::new(limbs);
    let nbits = 64 * words.len() as i64;
    // value = m * 2^(e - nbits)
    let shift = e - nbits;
    let mag: BigUint = if shift >= 0 {
        m << (shift as usize)
    } else {
        let s = (-shift) as usize;
        // round half away from zero
        (m + (BigUint::from(1u32) << (s - 1))) >> s
    };
    let v = BigInt::from(mag);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Mantissa budgets are whole 64-bit words; smaller requests give NaN.
fn words(prec: usize) -> usize {
    prec.max(64).div_ceil(64) * 64
}

fn ulp_bound(x: &BigFloat, prec: usize, ulps: f64) -> f64 {
    big_to_f64(x).abs() * ulps * 2f64.powi(-(prec as i32) + 1)
}

fn up(x: f64) -> f64 {
    // inflate an f64 computed bound by a relative 2^-50 to absorb its own rounding
    x * (1.0 + 2f64.powi(-50))
}

/// Real number with an absolute error bound.
#[derive(Debug, Clone)]
pub struct RealHP {
    v: BigFloat,
    err: f64,
    prec: usize,
}

impl RealHP {
    pub fn from_i64(n: i64, prec: usize) -> Self {
        let prec = words(prec);
        RealHP { v: BigFloat::from_i64(n, prec), err: 0.0, prec }
    }

    /// `num / den` rounded to `prec` bits.
    pub fn from_ratio(num: i64, den: i64, prec: usize) -> Self {
        let n = RealHP::from_i64(num, prec);
        n.div(&RealHP::from_i64(den, prec))
    }

    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        let prec = words(prec);
        // split into 32-bit limbs and rebuild
        let (sign, digits) = n.to_u32_digits();
        let mut v = BigFloat::from_u64(0, prec);
        let base = BigFloat::from_u64(1u64 << 32, prec);
        for d in digits.iter().rev() {
            v = v.mul(&base, prec, RM).add(&BigFloat::from_u64(*d as u64, prec), prec, RM);
        }
        if sign == num_bigint::Sign::Minus {
            v = v.neg();
        }
        let exact_bits = n.bits() as usize;
        let err = if exact_bits <= prec { 0.0 } else { ulp_bound(&v, prec, 2.0) * digits.len() as f64 };
        RealHP { v, err, prec }
    }

    pub fn from_rational(r: &num_rational::BigRational, prec: usize) -> Self {
        RealHP::from_bigint(r.numer(), prec).div(&RealHP::from_bigint(r.denom(), prec))
    }

    /// An f64 value with an explicit error bound.
    pub fn from_f64(x: f64, err: f64, prec: usize) -> Self {
        let prec = words(prec);
        RealHP { v: BigFloat::from_f64(x, prec), err, prec }
    }

    pub fn zero(prec: usize) -> Self {
        RealHP::from_i64(0, prec)
    }

    pub fn pi(prec: usize) -> Self {
        let prec = words(prec);
        let v = with_consts(|c| c.pi(prec, RM));
        let err = ulp_bound(&v, prec, 1.0);
        RealHP { v, err, prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn to_f64(&self) -> f64 {
        big_to_f64(&self.v)
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative()
    }

    pub fn with_extra_err(mut self, e: f64) -> Self {
        self.err = up(self.err + e);
        self
    }

    pub fn add(&self, o: &RealHP) -> RealHP {
        let p = self.prec.max(o.prec);
        let v = self.v.add(&o.v, p, RM);
        let err = up(self.err + o.err + ulp_bound(&v, p, 2.0));
        RealHP { v, err, prec: p }
    }

    pub fn sub(&self, o: &RealHP) -> RealHP {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RealHP {
        RealHP { v: self.v.neg(), err: self.err, prec: self.prec }
    }

    pub fn mul(&self, o: &RealHP) -> RealHP {
        let p = self.prec.max(o.prec);
        let v = self.v.mul(&o.v, p, RM);
        let (a, b) = (self.abs_f64(), o.abs_f64());
        let err = up(a * o.err + b * self.err + self.err * o.err + ulp_bound(&v, p, 2.0));
        RealHP { v, err, prec: p }
    }

    pub fn mul_i64(&self, n: i64) -> RealHP {
        self.mul(&RealHP::from_i64(n, self.prec))
    }

    pub fn div(&self, o: &RealHP) -> RealHP {
        let p = self.prec.max(o.prec);
        let v = self.v.div(&o.v, p, RM);
        let b = o.abs_f64();
        let q = big_to_f64(&v).abs();
        let err = if o.err >= b {
            f64::INFINITY
        } else {
            up((self.err + q * o.err) / (b - o.err) + ulp_bound(&v, p, 2.0))
        };
        RealHP { v, err, prec: p }
    }

    pub fn sqrt(&self) -> RealHP {
        let p = self.prec;
        let v = self.v.sqrt(p, RM);
        let s = big_to_f64(&v).abs();
        let err = if self.err == 0.0 {
            ulp_bound(&v, p, 2.0)
        } else if s > 0.0 {
            up(self.err / s + ulp_bound(&v, p, 2.0))
        } else {
            up(self.err.sqrt())
        };
        RealHP { v, err, prec: p }
    }

    pub fn exp(&self) -> RealHP {
        let p = self.prec;
        let v = with_consts(|c| self.v.exp(p, RM, c));
        let m = big_to_f64(&v).abs();
        let err = up(m * self.err.exp_m1() + ulp_bound(&v, p, 4.0));
        RealHP { v, err, prec: p }
    }

    pub fn cos(&self) -> RealHP {
        let p = self.prec;
        let v = with_consts(|c| self.v.cos(p, RM, c));
        let err = up(self.err + 4.0 * 2f64.powi(-(p as i32) + 1));
        RealHP { v, err, prec: p }
    }

    pub fn sin(&self) -> RealHP {
        let p = self.prec;
        let v = with_consts(|c| self.v.sin(p, RM, c));
        let err = up(self.err + 4.0 * 2f64.powi(-(p as i32) + 1));
        RealHP { v, err, prec: p }
    }

    /// `sinh(x) = (e^x - e^-x) / 2` through one exponential.
    pub fn sinh(&self) -> RealHP {
        let e = self.exp();
        let one = RealHP::from_i64(1, self.prec);
        let inv = one.div(&e);
        e.sub(&inv).div(&RealHP::from_i64(2, self.prec))
    }

    pub fn powi(&self, n: u32) -> RealHP {
        let mut acc = RealHP::from_i64(1, self.prec);
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
        acc
    }

    /// Rounds `self * den` to the nearest integer `n` and returns `(n, |self - n/den|)`.
    pub fn round_scaled(&self, den: i64) -> (BigInt, f64) {
        let scaled = self.v.mul(&BigFloat::from_i64(den, self.prec), self.prec, RM);
        let n = big_round_to_int(&scaled);
        let p2 = self.prec + n.bits() as usize + 8;
        let nb = RealHP::from_bigint(&n, p2);
        let diff = scaled.sub(&nb.v, p2, RM);
        (n, big_to_f64(&diff).abs() / den as f64)
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let x = self.to_f64();
        if digits <= 16 || x == 0.0 {
            return format!("{:.*e}", digits.saturating_sub(1).min(16), x);
        }
        // integer part via exact rounding, remaining digits via scaling
        let scale = BigInt::from(10u32).pow(digits as u32);
        let mag = x.abs().log10().floor() as i64;
        let shift = digits as i64 - 1 - mag;
        let (n, _) = if shift >= 0 {
            let s = BigInt::from(10u32).pow(shift as u32);
            let scaled = self.mul(&RealHP::from_bigint(&s, self.prec));
            (scaled.round_scaled(1).0, 0.0)
        } else {
            (BigInt::zero(), 0.0)
        };
        let _ = scale;
        let s = n.abs().to_string();
        let sign = if n.is_negative() { "-" } else { "" };
        if s.len() > 1 {
            format!("{}{}.{}e{}", sign, &s[..1], &s[1..], mag)
        } else {
            format!("{}{}e{}", sign, s, mag)
        }
    }
}

impl std::fmt::Display for RealHP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (+/- {:.3e})", self.to_f64(), self.err)
    }
}

/// Complex number with an absolute error bound on the modulus of the error.
#[derive(Debug, Clone)]
pub struct ComplexHP {
    re: BigFloat,
    im: BigFloat,
    err: f64,
    prec: usize,
}

impl ComplexHP {
    pub fn from_parts(re: RealHP, im: RealHP) -> Self {
        let prec = re.prec.max(im.prec);
        ComplexHP { err: up(re.err + im.err), re: re.v, im: im.v, prec }
    }

    pub fn from_real(re: RealHP) -> Self {
        let prec = re.prec;
        ComplexHP::from_parts(re, RealHP::zero(prec))
    }

    pub fn from_f64(re: f64, im: f64, err: f64, prec: usize) -> Self {
        let prec = words(prec);
        ComplexHP {
            re: BigFloat::from_f64(re, prec),
            im: BigFloat::from_f64(im, prec),
            err,
            prec,
        }
    }

    pub fn zero(prec: usize) -> Self {
        ComplexHP::from_f64(0.0, 0.0, 0.0, prec)
    }

    pub fn one(prec: usize) -> Self {
        ComplexHP::from_f64(1.0, 0.0, 0.0, prec)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn with_extra_err(mut self, e: f64) -> Self {
        self.err = up(self.err + e);
        self
    }

    pub fn re(&self) -> RealHP {
        RealHP { v: self.re.clone(), err: self.err, prec: self.prec }
    }

    pub fn im(&self) -> RealHP {
        RealHP { v: self.im.clone(), err: self.err, prec: self.prec }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (big_to_f64(&self.re), big_to_f64(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        let (a, b) = self.to_f64();
        a.hypot(b)
    }

    fn ulp(&self, ulps: f64) -> f64 {
        self.abs_f64() * ulps * 2f64.powi(-(self.prec as i32) + 1)
    }

    pub fn add(&self, o: &ComplexHP) -> ComplexHP {
        let p = self.prec.max(o.prec);
        let mut r = ComplexHP {
            re: self.re.add(&o.re, p, RM),
            im: self.im.add(&o.im, p, RM),
            err: 0.0,
            prec: p,
        };
        r.err = up(self.err + o.err + r.ulp(2.0));
        r
    }

    pub fn sub(&self, o: &ComplexHP) -> ComplexHP {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ComplexHP {
        ComplexHP { re: self.re.neg(), im: self.im.neg(), err: self.err, prec: self.prec }
    }

    pub fn conj(&self) -> ComplexHP {
        ComplexHP { re: self.re.clone(), im: self.im.neg(), err: self.err, prec: self.prec }
    }

    pub fn add_real(&self, x: &RealHP) -> ComplexHP {
        self.add(&ComplexHP::from_real(x.clone()))
    }

    pub fn mul(&self, o: &ComplexHP) -> ComplexHP {
        let p = self.prec.max(o.prec);
        let rr = self.re.mul(&o.re, p, RM);
        let ii = self.im.mul(&o.im, p, RM);
        let ri = self.re.mul(&o.im, p, RM);
        let ir = self.im.mul(&o.re, p, RM);
        let mut r = ComplexHP {
            re: rr.sub(&ii, p, RM),
            im: ri.add(&ir, p, RM),
            err: 0.0,
            prec: p,
        };
        let (a, b) = (self.abs_f64(), o.abs_f64());
        r.err = up(a * o.err + b * self.err + self.err * o.err + 4.0 * a * b * 2f64.powi(-(p as i32) + 1));
        r
    }

    /// Product with a real scalar.
    pub fn scale(&self, x: &RealHP) -> ComplexHP {
        let p = self.prec.max(x.prec);
        let mut r = ComplexHP {
            re: self.re.mul(&x.v, p, RM),
            im: self.im.mul(&x.v, p, RM),
            err: 0.0,
            prec: p,
        };
        let (a, b) = (self.abs_f64(), x.abs_f64());
        r.err = up(a * x.err + b * self.err + self.err * x.err + r.ulp(2.0));
        r
    }

    pub fn div(&self, o: &ComplexHP) -> ComplexHP {
        let p = self.prec.max(o.prec);
        let n2 = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let num = self.mul(&o.conj());
        let mut r = ComplexHP {
            re: num.re.div(&n2, p, RM),
            im: num.im.div(&n2, p, RM),
            err: 0.0,
            prec: p,
        };
        let b = o.abs_f64();
        let q = r.abs_f64();
        r.err = if o.err >= b {
            f64::INFINITY
        } else {
            up((self.err + q * o.err) / (b - o.err) + r.ulp(4.0))
        };
        r
    }

    /// `e^z`.
    pub fn exp(&self) -> ComplexHP {
        let p = self.prec;
        let (mag, c, s) = with_consts(|cc| {
            (self.re.exp(p, RM, cc), self.im.cos(p, RM, cc), self.im.sin(p, RM, cc))
        });
        let mut r = ComplexHP { re: mag.mul(&c, p, RM), im: mag.mul(&s, p, RM), err: 0.0, prec: p };
        let m = big_to_f64(&mag).abs();
        // |e^(z+d) - e^z| <= |e^z| (e^|d| - 1)
        r.err = up(m * self.err.exp_m1() + r.ulp(8.0) + m * 8.0 * 2f64.powi(-(p as i32) + 1));
        r
    }

    pub fn powi(&self, n: u32) -> ComplexHP {
        let mut acc = ComplexHP::one(self.prec);
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
        acc
    }
}

impl std::fmt::Display for ComplexHP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.to_f64();
        write!(f, "{a} + {b}i (+/- {:.3e})", self.err)
    }
}

#[allow(dead_code)]
pub(crate) fn sign_of(x: &BigFloat) -> Sign {
    x.sign().unwrap_or(Sign::Pos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip() {
        for x in [1.0, -2.5, 3.0e-12, 1.2345678901234567e200, -7.0e-300] {
            let h = RealHP::from_f64(x, 0.0, 128);
            assert_eq!(h.to_f64(), x);
        }
    }

    #[test]
    fn pi_and_exp() {
        let pi = RealHP::pi(256);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        // e^(pi sqrt 163) = 640320^3 + 744 - 7.4999e-13
        let x = pi.mul(&RealHP::from_i64(163, 256).sqrt()).exp();
        let (n, res) = x.round_scaled(1);
        assert_eq!(n, BigInt::from(640320i64).pow(3) + 744);
        assert!((res - 7.499274028018e-13).abs() < 1e-24, "{res}");
        assert!(x.err() < 1e-40);
    }

    #[test]
    fn bigint_roundtrip() {
        let n: BigInt = "-123456789012345678901234567890123".parse().unwrap();
        let h = RealHP::from_bigint(&n, 256);
        assert_eq!(h.round_scaled(1).0, n);
    }

    #[test]
    fn complex_exp() {
        let pi = RealHP::pi(128);
        let z = ComplexHP::from_parts(RealHP::zero(128), pi);
        let e = z.exp();
        let (a, b) = e.to_f64();
        assert!((a + 1.0).abs() < 1e-30 && b.abs() < 1e-30);
        assert!(e.err() < 1e-30);
    }

    #[test]
    fn decimal() {
        let x = RealHP::from_i64(1, 256).div(&RealHP::from_i64(3, 256));
        assert!(x.to_decimal(30).starts_with("3.33333333333333333333333333333e-1"));
    }
}
