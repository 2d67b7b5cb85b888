//! Eta products, Eisenstein series, `j`, the weight 3/2 form `g` and theta.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::QSeries;
use crate::error::{Error, Result};

/// Truncated integer power series helpers; `n` is always the output length.
pub(crate) mod ints {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    pub fn mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
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

    /// Inverse of a series with constant term 1.
    pub fn inv_unit(a: &[BigInt], n: usize) -> Vec<BigInt> {
        assert!(a[0].is_one(), "constant term must be 1");
        let mut r: Vec<BigInt> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                r.push(BigInt::one());
                continue;
            }
            let mut s = BigInt::zero();
            for i in 1..=k.min(a.len() - 1) {
                if !a[i].is_zero() {
                    s += &a[i] * &r[k - i];
                }
            }
            r.push(-s);
        }
        r
    }

    pub fn pow(a: &[BigInt], e: i64, n: usize) -> Vec<BigInt> {
        let base: Vec<BigInt> = if e < 0 { inv_unit(a, n) } else { a[..a.len().min(n)].to_vec() };
        let mut k = e.unsigned_abs();
        let mut acc = vec![BigInt::zero(); n];
        acc[0] = BigInt::one();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = mul(&acc, &b, n);
            }
            k >>= 1;
            if k > 0 {
                b = mul(&b, &b, n);
            }
        }
        acc
    }

    /// `sum a_k q^(k m)` from `sum a_k q^k`.
    pub fn dilate(a: &[BigInt], m: usize, n: usize) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); n];
        for (k, x) in a.iter().enumerate() {
            if k * m >= n {
                break;
            }
            out[k * m] = x.clone();
        }
        out
    }
}

/// `prod_{n >= 1} (1 - q^n)` to `n` terms, via Euler's pentagonal number theorem.
pub fn euler_product(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    if n == 0 {
        return out;
    }
    out[0] = BigInt::one();
    let mut k = 1i64;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let p1 = (k * (3 * k - 1) / 2) as usize;
        let p2 = (k * (3 * k + 1) / 2) as usize;
        if p1 >= n {
            break;
        }
        out[p1] += sign;
        if p2 < n {
            out[p2] += sign;
        }
        k += 1;
    }
    out
}

fn raw_trunc(trunc: Rational64, denom: u32) -> Result<i64> {
    let scaled = trunc * Rational64::from_integer(denom as i64);
    if !scaled.is_integer() {
        return Err(Error::InvalidArgument(format!("truncation {trunc} is not a multiple of 1/{denom}")));
    }
    Ok(scaled.to_integer())
}

/// `prod eta(delta tau)^r` for the given `(delta, r)` pairs, known below `trunc`
/// (a multiple of 1/24).
pub fn eta_quotient(factors: &[(u32, i64)], trunc: Rational64) -> Result<QSeries> {
    let t24 = raw_trunc(trunc, 24)?;
    let s24: i64 = factors.iter().map(|&(d, r)| d as i64 * r).sum();
    let n = ((t24 - s24).max(0) + 23) as usize / 24;
    let p = euler_product(n.max(1));
    let mut acc = vec![BigInt::zero(); n];
    if n > 0 {
        acc[0] = BigInt::one();
    }
    for &(d, r) in factors {
        let pd = ints::dilate(&p, d as usize, n.max(1));
        acc = ints::mul(&acc, &ints::pow(&pd, r, n.max(1)), n);
    }
    let terms = acc.into_iter().enumerate().map(|(k, c)| (s24 + 24 * k as i64, BigRational::from_integer(c)));
    Ok(QSeries::from_raw_terms(24, t24, terms).normalized())
}

/// Dedekind's `eta = q^(1/24) prod (1 - q^n)`, with exponents in `(1/24) Z`.
pub fn eta(trunc: Rational64) -> Result<QSeries> {
    if trunc <= Rational64::new(1, 24) {
        return Err(Error::InvalidArgument("eta needs trunc > 1/24".into()));
    }
    let t24 = raw_trunc(trunc, 24)?;
    let n = (t24 - 1 + 23) as usize / 24;
    let p = euler_product(n);
    let terms = p.into_iter().enumerate().map(|(k, c)| (1 + 24 * k as i64, BigRational::from_integer(c)));
    Ok(QSeries::from_raw_terms(24, t24, terms))
}

/// `sigma_k(n)`, the sum of `k`-th powers of the divisors of `n >= 1`.
pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// `sigma_1` extended to rationals: `sigma_1(0) = -1/24`, zero off the
/// nonnegative integers.
pub fn sigma1(x: Rational64) -> Rational64 {
    if !x.is_integer() || x < Rational64::zero() {
        return Rational64::zero();
    }
    let n = x.to_integer();
    if n == 0 {
        return Rational64::new(-1, 24);
    }
    let s: i64 = sigma(1, n as u64).try_into().expect("sigma_1 fits in i64");
    Rational64::from_integer(s)
}

/// `-2k / B_k` for the supported weights.
fn eisenstein_factor(k: u32) -> Option<BigRational> {
    let (n, d) = match k {
        4 => (240, 1),
        6 => (-504, 1),
        8 => (480, 1),
        10 => (-264, 1),
        12 => (65520, 691),
        14 => (-24, 1),
        _ => return None,
    };
    Some(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

/// Normalized Eisenstein series `E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n`
/// for even `4 <= k <= 14`, known below `q^trunc`.
pub fn eisenstein(k: u32, trunc: i64) -> Result<QSeries> {
    let f = eisenstein_factor(k).ok_or(Error::UnsupportedWeight(k as i64))?;
    let terms = (0..trunc.max(0)).map(|n| {
        if n == 0 {
            (0, BigRational::one())
        } else {
            (n, &f * BigRational::from_integer(sigma(k - 1, n as u64)))
        }
    });
    Ok(QSeries::from_raw_terms(1, trunc, terms))
}

/// Integer coefficients of `E_4` at `0..n`.
fn e4_ints(n: usize) -> Vec<BigInt> {
    (0..n).map(|m| if m == 0 { BigInt::one() } else { 240 * sigma(3, m as u64) }).collect()
}

/// `j = E_4^3 / eta^24 = q^-1 + 744 + 196884 q + ...`, known below `q^trunc`.
pub fn j_series(trunc: i64) -> Result<QSeries> {
    if trunc < 1 {
        return Err(Error::InvalidArgument("j needs trunc >= 1".into()));
    }
    let n = (trunc + 1) as usize;
    let e4 = e4_ints(n);
    let num = ints::mul(&ints::mul(&e4, &e4, n), &e4, n);
    let den = ints::pow(&euler_product(n), -24, n);
    Ok(QSeries::from_int_coeffs(-1, ints::mul(&num, &den, n)))
}

/// The Hauptmodul `J = j - 744`.
pub fn big_j_series(trunc: i64) -> Result<QSeries> {
    let j = j_series(trunc)?;
    Ok(j.add_const(&BigRational::from_integer(BigInt::from(-744))))
}

/// The weight 3/2 form `-q^-1 + 2 - 248 q^3 + 492 q^4 - ...` attached to the
/// eta quotient `eta(tau)^2 E_4(4 tau) / (eta(2 tau) eta(4 tau)^6)`.
///
/// The quotient itself starts `q^-1 - 2 + 248 q^3`; it is returned negated so
/// its coefficients are the traces of `J`.
pub fn g_series(trunc: i64) -> Result<QSeries> {
    if trunc < 1 {
        return Err(Error::InvalidArgument("g needs trunc >= 1".into()));
    }
    let n = (trunc + 1) as usize;
    let p = euler_product(n);
    let num = ints::mul(&ints::pow(&p, 2, n), &ints::dilate(&e4_ints(n), 4, n), n);
    let den = ints::mul(&ints::dilate(&p, 2, n), &ints::pow(&ints::dilate(&p, 4, n), 6, n), n);
    let q = ints::mul(&num, &ints::inv_unit(&den, n), n);
    Ok(QSeries::from_int_coeffs(-1, q.into_iter().map(|c| -c).collect()))
}

/// `theta = sum_{n in Z} q^(n^2)`, known below `q^trunc`.
pub fn theta_series(trunc: i64) -> Result<QSeries> {
    if trunc < 1 {
        return Err(Error::InvalidArgument("theta needs trunc >= 1".into()));
    }
    let mut c = vec![BigInt::zero(); trunc as usize];
    let mut n = 0i64;
    while n * n < trunc {
        c[(n * n) as usize] += if n == 0 { 1 } else { 2 };
        n += 1;
    }
    Ok(QSeries::from_int_coeffs(0, c))
}

/// Least common multiple of the denominators of the known coefficients.
pub fn coefficient_denominator(s: &QSeries) -> BigInt {
    s.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ci(s: &QSeries, n: i64) -> i64 {
        s.coeff_int(n).unwrap().to_integer().to_i64().unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn eta_leading_terms() {
        let e = eta(r(100, 24)).unwrap();
        assert_eq!(e.coeff(r(1, 24)).unwrap(), BigRational::one());
        assert_eq!(e.coeff(r(25, 24)).unwrap(), BigRational::from_integer((-1).into()));
        let d = e.pow(24).unwrap();
        assert_eq!(d.valuation(), Some(r(1, 1)));
        assert!(d.is_integral());
        // Ramanujan's tau(2) = -24
        assert_eq!(d.coeff_int(2).unwrap(), BigRational::from_integer((-24).into()));
    }

    #[test]
    fn euler_product_matches_direct_expansion() {
        let n = 60;
        let mut direct = vec![BigInt::zero(); n];
        direct[0] = BigInt::one();
        for k in 1..n {
            let mut f = vec![BigInt::zero(); n];
            f[0] = BigInt::one();
            f[k] = BigInt::from(-1);
            direct = ints::mul(&direct, &f, n);
        }
        assert_eq!(euler_product(n), direct);
    }

    #[test]
    fn eisenstein_coefficients() {
        let e4 = eisenstein(4, 10).unwrap();
        assert_eq!(ci(&e4, 1), 240);
        assert_eq!(ci(&e4, 2), 2160);
        for k in [4, 6, 8, 10, 12, 14] {
            assert_eq!(eisenstein(k, 5).unwrap().coeff_int(0).unwrap(), BigRational::one());
        }
        assert_eq!(eisenstein(16, 5), Err(Error::UnsupportedWeight(16)));
        assert_eq!(eisenstein(2, 5), Err(Error::UnsupportedWeight(2)));
        // E_4^2 = E_8 and E_4 E_6 = E_10
        let t = 30;
        let e6 = eisenstein(6, t).unwrap();
        let e4 = eisenstein(4, t).unwrap();
        assert_eq!(e4.mul(&e4), eisenstein(8, t).unwrap());
        assert_eq!(e4.mul(&e6), eisenstein(10, t).unwrap());
        assert_eq!(e4.mul(&e4).mul(&e6), eisenstein(14, t).unwrap());
    }

    #[test]
    fn j_coefficients() {
        let j = j_series(5).unwrap();
        assert_eq!(ci(&j, -1), 1);
        assert_eq!(ci(&j, 0), 744);
        assert_eq!(ci(&j, 1), 196884);
        assert_eq!(ci(&j, 2), 21493760);
        assert_eq!(ci(&j, 3), 864299970);
        assert_eq!(j.trunc(), r(5, 1));
        let big_j = big_j_series(5).unwrap();
        assert_eq!(ci(&big_j, 0), 0);
    }

    #[test]
    fn j_via_generic_arithmetic() {
        let t = 12;
        let e4 = eisenstein(4, t + 1).unwrap();
        let delta = eta(r(t + 2, 1)).unwrap().pow(24).unwrap();
        let j = e4.pow(3).unwrap().div(&delta).unwrap();
        assert_eq!(j.truncate(r(t, 1)), j_series(t).unwrap());
        assert_eq!(delta.mul(&j).truncate(r(t, 1)), e4.pow(3).unwrap().truncate(r(t, 1)));
    }

    #[test]
    fn g_coefficients() {
        let g = g_series(20).unwrap();
        let expect = [(-1, -1), (0, 2), (3, -248), (4, 492), (7, -4119), (8, 7256)];
        for (e, c) in expect {
            assert_eq!(ci(&g, e), c, "q^{e}");
        }
        // generic eta-quotient route agrees
        let q = eta_quotient(&[(1, 2), (2, -1), (4, -6)], r(21, 1)).unwrap();
        let e44 = eisenstein(4, 6).unwrap().scale_q(4);
        assert_eq!(q.mul(&e44).neg().truncate(r(20, 1)), g.truncate(r(20, 1)));
    }

    #[test]
    fn theta_and_sigma() {
        let th = theta_series(10).unwrap();
        assert_eq!(ci(&th, 0), 1);
        assert_eq!(ci(&th, 1), 2);
        assert_eq!(ci(&th, 3), 0);
        assert_eq!(ci(&th, 9), 2);
        assert_eq!(sigma1(r(0, 1)), r(-1, 24));
        assert_eq!(sigma1(r(6, 1)), r(12, 1));
        assert_eq!(sigma1(r(3, 2)), r(0, 1));
        assert_eq!(sigma1(r(-2, 1)), r(0, 1));
        // theta as an eta quotient
        let te = eta_quotient(&[(2, 5), (1, -2), (4, -2)], r(40, 1)).unwrap();
        assert_eq!(te, theta_series(40).unwrap());
    }
}
