//! Kloosterman sums, the quadratic exponential sums `S(D, c)`, modified
//! Bessel functions and the Poincare series coefficient formula.

use num_integer::Integer;
use num_rational::Rational64;

use super::hp::RealHP;
use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let g = a.extended_gcd(&m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

/// `K(m, n, c) = sum over d mod c with gcd(d, c) = 1 of e((m dbar + n d) / c)`,
/// evaluated at `precision` bits.
pub fn kloosterman(m: i64, n: i64, c: u64, precision: usize) -> Result<RealHP> {
    if c == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let ci = c as i64;
    let two_pi = RealHP::pi(precision).mul_i64(2);
    let mut sum = RealHP::zero(precision);
    for d in 0..ci {
        if let Some(db) = inv_mod(d, ci) {
            let k = ((m.rem_euclid(ci) as i128 * db as i128 + n.rem_euclid(ci) as i128 * d as i128) % ci as i128) as i64;
            sum = sum.add(&two_pi.mul_i64(k).div(&RealHP::from_i64(ci, precision)).cos());
        }
    }
    Ok(sum)
}

/// The same sum in double precision by direct enumeration.
pub fn kloosterman_f64(m: i64, n: i64, c: u64) -> f64 {
    let ci = c as i64;
    (0..ci)
        .filter_map(|d| {
            inv_mod(d, ci).map(|db| {
                let k = (m.rem_euclid(ci) as i128 * db as i128 + n.rem_euclid(ci) as i128 * d as i128) % ci as i128;
                (TAU * k as f64 / c as f64).cos()
            })
        })
        .sum()
}

/// Roots of `x^2 = -D (mod c)` in `[0, c)` by scanning every residue.
pub fn sqrt_roots_scan(d: i64, c: u64) -> Vec<u64> {
    let target = (-d).rem_euclid(c as i64) as u128;
    (0..c).filter(|&x| (x as u128 * x as u128) % c as u128 == target).collect()
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Roots of `x^2 = -D (mod c)` by scanning each prime-power factor and
/// combining with the Chinese remainder theorem.
pub fn sqrt_roots_crt(d: i64, c: u64) -> Vec<u64> {
    let mut roots: Vec<u64> = vec![0];
    let mut modulus: u64 = 1;
    for (p, k) in factor(c) {
        let q = p.pow(k);
        let local = sqrt_roots_scan(d, q);
        if local.is_empty() {
            return Vec::new();
        }
        let mut next = Vec::with_capacity(roots.len() * local.len());
        // x = r (mod modulus), x = s (mod q)
        let inv = inv_mod(modulus as i64 % q as i64, q as i64).expect("coprime factors") as i128;
        for &r in &roots {
            for &s in &local {
                let t = ((s as i128 - r as i128).rem_euclid(q as i128) * inv) % q as i128;
                next.push((r as i128 + modulus as i128 * t) as u64);
            }
        }
        roots = next;
        modulus *= q;
    }
    roots.sort_unstable();
    roots
}

/// `S(D, c) = sum over x mod c with x^2 = -D (mod c) of e(2x / c)`.
pub fn exp_sum_s(d: i64, c: u64, precision: usize) -> Result<RealHP> {
    if c == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let four_pi = RealHP::pi(precision).mul_i64(4);
    let cr = RealHP::from_i64(c as i64, precision);
    let mut sum = RealHP::zero(precision);
    for x in sqrt_roots_crt(d, c) {
        sum = sum.add(&four_pi.mul_i64(x as i64).div(&cr).cos());
    }
    Ok(sum)
}

/// Orders supported by [`bessel_i`].
pub fn bessel_order_supported(nu: Rational64) -> bool {
    nu == Rational64::new(1, 2) || (nu.is_integer() && (3..=13).contains(&nu.to_integer()))
}

/// `I_nu(x)` for `nu = 1/2` (closed form) or an integer `3 <= nu <= 13`.
///
/// Uses the power series (positive terms, certified geometric tail) unless
/// `x` is large enough for the asymptotic expansion to reach the requested
/// precision, in which case the expansion is truncated at its smallest term.
pub fn bessel_i(nu: Rational64, x: &RealHP, precision: usize) -> Result<RealHP> {
    if !bessel_order_supported(nu) {
        return Err(Error::UnsupportedOrder(nu.to_string()));
    }
    if x.is_negative() {
        return Err(Error::InvalidArgument("Bessel argument must be nonnegative".into()));
    }
    let xf = x.to_f64();
    let out = if nu == Rational64::new(1, 2) {
        if xf == 0.0 {
            RealHP::zero(precision)
        } else {
            // sqrt(2 / (pi x)) sinh x
            RealHP::from_i64(2, precision).div(&RealHP::pi(precision).mul(x)).sqrt().mul(&x.sinh())
        }
    } else {
        let n = nu.to_integer() as u32;
        if xf > 40.0 && xf > 0.4 * precision as f64 + 20.0 {
            bessel_i_asymptotic(n, x, precision)
        } else {
            bessel_i_series(n, x, precision)
        }
    };
    let allowed = out.abs_f64() * 2f64.powi(-(precision as i32) + 16) + 2f64.powi(-(precision as i32));
    if !(out.err() <= allowed) {
        return Err(Error::PrecisionUnachievable(format!("I_{nu}({xf}): error bound {:.3e}", out.err())));
    }
    Ok(out)
}

/// `sum_k (x/2)^(2k+n) / (k! (k+n)!)`.
pub(crate) fn bessel_i_series(n: u32, x: &RealHP, precision: usize) -> RealHP {
    let half = x.div(&RealHP::from_i64(2, precision));
    let h2 = half.mul(&half);
    let mut term = half.powi(n);
    for i in 1..=n {
        term = term.div(&RealHP::from_i64(i as i64, precision));
    }
    let mut sum = term.clone();
    let eps = 2f64.powi(-(precision as i32) - 4);
    let mut k: i64 = 0;
    loop {
        k += 1;
        term = term.mul(&h2).div(&RealHP::from_i64(k * (k + n as i64), precision));
        sum = sum.add(&term);
        let ratio = h2.to_f64() / ((k + 1) * (k + 1 + n as i64)) as f64;
        let t = term.abs_f64();
        if ratio < 0.5 && t * ratio / (1.0 - ratio) <= eps * sum.abs_f64().max(f64::MIN_POSITIVE) || t == 0.0 {
            let tail = if t == 0.0 { 0.0 } else { t * ratio / (1.0 - ratio) };
            return sum.with_extra_err(tail);
        }
    }
}

/// `e^x / sqrt(2 pi x) sum_k (-1)^k a_k(nu) / x^k`, stopped at the smallest
/// term; the remainder is bounded by twice the first omitted term plus the
/// exponentially small `e^-x` companion.
pub(crate) fn bessel_i_asymptotic(n: u32, x: &RealHP, precision: usize) -> RealHP {
    let mu = 4 * (n as i64) * (n as i64);
    let mut term = RealHP::from_i64(1, precision);
    let mut sum = term.clone();
    let eight_x = x.mul_i64(8);
    let mut k: i64 = 0;
    let omitted = loop {
        k += 1;
        let f = mu - (2 * k - 1) * (2 * k - 1);
        let next = term.mul_i64(-f).div(&eight_x.mul_i64(k));
        if (k > n as i64 && next.abs_f64() >= term.abs_f64()) || k > 4 * precision as i64 {
            break next.abs_f64();
        }
        term = next;
        sum = sum.add(&term);
    };
    let pref = x.exp().div(&RealHP::pi(precision).mul_i64(2).mul(x).sqrt());
    let companion = (-2.0 * x.to_f64()).exp();
    let s = sum.with_extra_err(2.0 * omitted + companion);
    pref.mul(&s)
}

/// Power series for `I_n(x)` in double precision.
pub fn bessel_i_f64(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let h2 = h * h;
    let mut term = (1..=n).fold(h.powi(n as i32), |t, i| t / i as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= h2 / (k * (k + n)) as f64;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

/// Result of the Poincare coefficient sum.
#[derive(Debug, Clone)]
pub struct PoincareCoeff {
    pub k: u32,
    pub m: u64,
    pub n: u64,
    pub c_max: u64,
    /// Partial sum including the prefactor.
    pub value: RealHP,
    /// Heuristic bound on the omitted terms `c > c_max`.
    pub tail_estimate: f64,
    /// Magnitude of the contribution of `c_max / 2 < c <= c_max`.
    pub last_block: f64,
}

/// Smallest-prime-factor sieve.
fn spf_sieve(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// `a mod q` for `a < 2^64` through a precomputed reciprocal.
#[derive(Clone, Copy)]
struct FastMod {
    q: u64,
    r: u64,
}

impl FastMod {
    fn new(q: u64) -> Self {
        FastMod { q, r: u64::MAX / q }
    }

    #[inline]
    fn reduce(&self, a: u64) -> u64 {
        let est = ((a as u128 * self.r as u128) >> 64) as u64;
        let mut rem = a - est * self.q;
        while rem >= self.q {
            rem -= self.q;
        }
        rem
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }
}

/// `cos(2 pi k / q)` for `k < q`, by rotation resynchronized every 64 steps.
fn cos_table(q: u64) -> Vec<f64> {
    let mut cos = vec![0.0; q as usize];
    let step = TAU / q as f64;
    let (ws, wc) = step.sin_cos();
    let half = q / 2;
    let (mut c, mut s) = (1.0f64, 0.0f64);
    for k in 0..=half {
        if k % 64 == 0 {
            (s, c) = (step * k as f64).sin_cos();
        }
        cos[k as usize] = c;
        if k > 0 {
            cos[(q - k) as usize] = c;
        }
        (c, s) = (c * wc - s * ws, s * wc + c * ws);
    }
    cos
}

/// Tables for sums modulo one prime power `q = p^e`: inverses of units and
/// `cos(2 pi k / q)`.
struct LocalTables {
    q: u64,
    p: u64,
    inv: Vec<u32>,
    cos: Vec<f64>,
    fm: FastMod,
}

impl LocalTables {
    fn new(q: u64, p: u64) -> Self {
        let fm = FastMod::new(q);
        let mut inv = vec![0u32; q as usize];
        if q == p && q > 2 {
            // prefix products, with (q-1)! = -1 by Wilson's theorem
            let mut pre = vec![1u64; q as usize];
            for i in 1..q as usize {
                pre[i] = fm.mul(pre[i - 1], i as u64);
            }
            let mut inv_pre = q - 1;
            for i in (1..q as usize).rev() {
                inv[i] = fm.mul(pre[i - 1], inv_pre) as u32;
                inv_pre = fm.mul(inv_pre, i as u64);
            }
        } else {
            for i in 1..q {
                if i % p != 0 {
                    inv[i as usize] = inv_mod(i as i64, q as i64).expect("unit") as u32;
                }
            }
        }
        LocalTables { q, p, inv, cos: cos_table(q), fm }
    }

    /// `K(t, 1; q)`, pairing `d` with `q - d`.
    fn k_unit(&self, t: u64) -> f64 {
        let q = self.q;
        if q == 1 {
            return 1.0;
        }
        if q == 2 {
            return self.cos[self.fm.reduce(t + 1) as usize];
        }
        let mut s = 0.0;
        if q == self.p {
            for d in 1..=(q - 1) / 2 {
                s += self.cos[self.fm.reduce(t * self.inv[d as usize] as u64 + d) as usize];
            }
        } else {
            for d in (1..=(q - 1) / 2).filter(|d| d % self.p != 0) {
                s += self.cos[self.fm.reduce(t * self.inv[d as usize] as u64 + d) as usize];
            }
        }
        2.0 * s
    }
}

/// `K(m, n, c)` for every `c <= c_max` and each `n` in `ns`, assembled from
/// prime-power factors via twisted multiplicativity.
fn kloosterman_sweep(m: i64, ns: &[u64], c_max: u64) -> Vec<Vec<f64>> {
    let n_max = c_max as usize;
    let spf = spf_sieve(n_max.max(2));
    let mut prod = vec![vec![1.0f64; ns.len()]; n_max + 1];
    // prime powers q = p^k and the multiples c with q || c
    let mut p = 2u64;
    while p <= c_max {
        if spf[p as usize] as u64 == p {
            let mut q = p;
            loop {
                let tables = LocalTables::new(q, p);
                let mut c = q;
                while c <= c_max {
                    if !(c / q).is_multiple_of(p) {
                        let s = c / q;
                        // K(m, n; q s) = K(m sbar, n sbar; q) * (factor from s)
                        let sbar = inv_mod((s % q) as i64, q as i64).expect("coprime") as u64;
                        let ms = (m.rem_euclid(q as i64) as u64 * sbar) % q;
                        for (i, &n) in ns.iter().enumerate() {
                            let nsb = (n % q) * sbar % q;
                            // K(a, b; q) = K(ab, 1; q) when a or b is a unit
                            let v = if !ms.is_multiple_of(p) || !nsb.is_multiple_of(p) {
                                tables.k_unit(ms * nsb % q)
                            } else {
                                kloosterman_f64(ms as i64, nsb as i64, q)
                            };
                            prod[c as usize][i] *= v;
                        }
                    }
                    c += q;
                }
                match q.checked_mul(p) {
                    Some(nq) if nq <= c_max => q = nq,
                    _ => break,
                }
            }
        }
        p += 1;
    }
    prod
}

/// Coefficients `a(n)` of the weight `k` Poincare series with principal part
/// `q^-m` from the Kloosterman-Bessel series truncated at `c_max`, for several
/// `n` sharing one sweep over `c`.
///
/// The Kloosterman sum in each term is `K(-m, n, c)`.
pub fn poincare_coeffs(k: u32, m: u64, ns: &[u64], c_max: u64, precision: usize) -> Result<Vec<PoincareCoeff>> {
    if !(4..=14).contains(&k) || !k.is_multiple_of(2) {
        return Err(Error::UnsupportedWeight(k as i64));
    }
    if m == 0 || ns.contains(&0) || c_max == 0 {
        return Err(Error::InvalidArgument("m, n and c_max must be positive".into()));
    }
    let ks = kloosterman_sweep(-(m as i64), ns, c_max);
    let nu = k - 1;
    let mut out = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let arg = 4.0 * std::f64::consts::PI * ((m * n) as f64).sqrt();
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut block = 0.0f64;
        for c in 1..=c_max {
            let t = ks[c as usize][i] / c as f64 * bessel_i_f64(nu, arg / c as f64);
            // Kahan summation
            let y = t - comp;
            let s2 = sum + y;
            comp = (s2 - sum) - y;
            sum = s2;
            if 2 * c > c_max {
                block += t;
            }
        }
        // prefactor 2 pi (-1)^(k/2) (n/m)^((k-1)/2)
        let sign = if (k / 2).is_multiple_of(2) { 1 } else { -1 };
        let ratio = RealHP::from_ratio(n as i64, m as i64, precision);
        let pw = ratio.powi(k - 1).sqrt();
        let pref = RealHP::pi(precision).mul_i64(2 * sign).mul(&pw);
        let pref_f = pref.to_f64().abs();
        // Weil: |K| <= tau(c) sqrt(gcd) sqrt(c); tau(c) replaced by its mean log c + 1,
        // and I_nu(x) <= (x/2)^nu / nu! e^(x^2/4) for the tail
        let cm = c_max as f64;
        let g = (m.gcd(&n) as f64).sqrt();
        let nu_f = nu as f64;
        let fact: f64 = (1..=nu).map(|i| i as f64).product();
        let bess = (arg / 2.0).powf(nu_f) / fact * (arg * arg / (4.0 * cm * cm)).exp();
        let expo = nu_f - 0.5;
        let tail = pref_f * g * bess * (cm.ln() + 1.0 + 1.0 / expo) * cm.powf(-expo) / expo;
        let partial = RealHP::from_f64(sum, (sum.abs() * 1e-15).max(1e-300) + comp.abs(), precision);
        let value = pref.mul(&partial);
        out.push(PoincareCoeff {
            k,
            m,
            n,
            c_max,
            value,
            tail_estimate: tail,
            last_block: (pref_f * block).abs(),
        });
    }
    Ok(out)
}

/// Single-coefficient form of [`poincare_coeffs`].
pub fn poincare_coeff(k: u32, m: u64, n: u64, c_max: u64, precision: usize) -> Result<PoincareCoeff> {
    Ok(poincare_coeffs(k, m, &[n], c_max, precision)?.remove(0))
}
