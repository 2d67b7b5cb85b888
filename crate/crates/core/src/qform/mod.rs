//! Positive definite binary quadratic forms: reduction, enumeration,
//! stabilizers, CM points and Hurwitz class numbers.
//!
//! A form `[a, b, c]` stands for `a x^2 + b xy + c y^2` with discriminant
//! `b^2 - 4ac = -D < 0`. Reduction follows the half-open fundamental domain
//! `-1/2 <= Re z < 1/2, |z| > 1` together with the left half of the unit arc,
//! so every `SL_2(Z)` class has exactly one reduced representative.

mod level;

pub use level::{class_id, fricke, gamma0_classes, level_p_orbits, ClassId, GroupTag, OrbitRep};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::analytic::hp::{ComplexHP, RealHP, MIN_PRECISION};
use crate::error::{Error, Result};

/// Integral 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mat2(pub [[i64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1, 0], [0, 1]]);
    pub const S: Mat2 = Mat2([[0, -1], [1, 0]]);
    pub const T: Mat2 = Mat2([[1, 1], [0, 1]]);

    pub fn det(&self) -> i64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Mat2 {
        debug_assert_eq!(self.det(), 1);
        let m = &self.0;
        Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn neg(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]])
    }

    /// Möbius action on a point of the upper half plane given as `(x, y)`.
    pub fn act_point(&self, x: f64, y: f64) -> (f64, f64) {
        let [[a, b], [c, d]] = self.0;
        let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
        // (a z + b) / (c z + d)
        let nr = a * x + b;
        let ni = a * y;
        let dr = c * x + d;
        let di = c * y;
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

/// Positive definite integral binary quadratic form `[a, b, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    /// Builds a form, rejecting anything that is not positive definite.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QuadForm { a, b, c };
        if a > 0 && c > 0 && f.disc() < 0 {
            Ok(f)
        } else {
            Err(Error::NotPositiveDefinite { a, b, c })
        }
    }

    /// `b^2 - 4ac`.
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The positive integer `D` with `disc = -D`.
    pub fn big_d(&self) -> i64 {
        -self.disc()
    }

    pub fn content(&self) -> i64 {
        num_integer::gcd(num_integer::gcd(self.a, self.b), self.c)
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    /// Value `Q(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    /// Substitution `(Q o g)(x, y) = Q(g (x, y)^T)`. For `g` in `SL_2(Z)` the
    /// CM point moves as `alpha_{Q o g} = g^{-1} alpha_Q`.
    pub fn act(&self, g: &Mat2) -> QuadForm {
        let [[p, q], [r, s]] = g.0;
        QuadForm {
            a: self.eval(p, r),
            b: 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s,
            c: self.eval(q, s),
        }
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        if !(-a < b && b <= a && a <= c) {
            return false;
        }
        !(a == c && b < 0)
    }

    /// Real part `-b / 2a` and imaginary part `sqrt(D) / 2a` of the CM point in f64.
    pub fn alpha_f64(&self) -> (f64, f64) {
        let two_a = 2.0 * self.a as f64;
        (-(self.b as f64) / two_a, (self.big_d() as f64).sqrt() / two_a)
    }
}

impl std::fmt::Display for QuadForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// Reduces `form` and returns the reduced form together with `g` in `SL_2(Z)`
/// such that `form.act(&g)` is the reduced form.
pub fn reduce_with_matrix(form: &QuadForm) -> Result<(QuadForm, Mat2)> {
    let f = QuadForm::new(form.a, form.b, form.c)?;
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    // accumulated transformation as i128 to stay safe on wild inputs
    let mut g = [[1i128, 0], [0, 1]];
    loop {
        // shift b into (-a, a]
        if b <= -a || b > a {
            let two_a = 2 * a;
            let k = (a - b).div_euclid(two_a);
            // b + 2ak lands in (-a, a]
            let nb = b + two_a * k;
            c += a * k * k + b * k;
            b = nb;
            // g <- g * T^k
            g = [[g[0][0], g[0][0] * k + g[0][1]], [g[1][0], g[1][0] * k + g[1][1]]];
        }
        if a > c {
            // apply S: (a, b, c) -> (c, -b, a)
            std::mem::swap(&mut a, &mut c);
            b = -b;
            g = [[g[0][1], -g[0][0]], [g[1][1], -g[1][0]]];
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        // S swaps b -> -b while keeping a = c
        b = -b;
        g = [[g[0][1], -g[0][0]], [g[1][1], -g[1][0]]];
    }
    let to64 = |v: i128| -> Result<i64> {
        i64::try_from(v).map_err(|_| Error::InvalidArgument("matrix entry overflow".into()))
    };
    let red = QuadForm { a: a as i64, b: b as i64, c: c as i64 };
    let m = Mat2([[to64(g[0][0])?, to64(g[0][1])?], [to64(g[1][0])?, to64(g[1][1])?]]);
    debug_assert_eq!(form.act(&m), red);
    Ok((red, m))
}

/// The unique reduced form equivalent to `form`.
pub fn reduce(form: &QuadForm) -> Result<QuadForm> {
    reduce_with_matrix(form).map(|(r, _)| r)
}

/// All reduced forms of discriminant `-d`, primitive or not, sorted by `(a, b, c)`.
pub fn enumerate_reduced(d: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    if d <= 0 || !(d % 4 == 0 || d % 4 == 3) {
        return out;
    }
    let mut a = 1i64;
    while 3 * a * a <= d {
        let start = -a + 1;
        for b in start..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            out.push(QuadForm { a, b, c });
        }
        a += 1;
    }
    out.sort();
    out
}

/// Order of the stabilizer of `form` in `PSL_2(Z)`.
pub fn stabilizer_order(form: &QuadForm) -> Result<u32> {
    let r = reduce(form)?;
    Ok(if r.a == r.b && r.b == r.c {
        3
    } else if r.b == 0 && r.a == r.c {
        2
    } else {
        1
    })
}

/// Elements of `SL_2(Z)` fixing a reduced form, one per `+-` pair.
pub(crate) fn stabilizer_elements(reduced: &QuadForm) -> Vec<Mat2> {
    let mut out = vec![Mat2::IDENTITY];
    for p in -1..=1 {
        for q in -1..=1 {
            for r in -1..=1 {
                for s in -1..=1 {
                    let g = Mat2([[p, q], [r, s]]);
                    if g.det() != 1 || g == Mat2::IDENTITY || g == Mat2::IDENTITY.neg() {
                        continue;
                    }
                    if reduced.act(&g) == *reduced && !out.contains(&g.neg()) && !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// A CM point `alpha_Q = (-b + i sqrt(D)) / 2a` with its exact data.
#[derive(Debug, Clone)]
pub struct CMPoint {
    pub form: QuadForm,
    /// `-b`
    pub neg_b: i64,
    /// `D`
    pub d: i64,
    /// `2a`
    pub two_a: i64,
    pub value: ComplexHP,
}

/// Evaluates `alpha_Q` to `precision` bits.
pub fn cm_point(form: &QuadForm, precision: usize) -> Result<CMPoint> {
    let f = QuadForm::new(form.a, form.b, form.c)?;
    if precision < MIN_PRECISION {
        return Err(Error::PrecisionTooLow(precision, MIN_PRECISION));
    }
    let two_a = 2 * f.a;
    let re = RealHP::from_ratio(-f.b, two_a, precision);
    let im = RealHP::from_i64(f.big_d(), precision)
        .sqrt()
        .div(&RealHP::from_i64(two_a, precision));
    Ok(CMPoint {
        form: f,
        neg_b: -f.b,
        d: f.big_d(),
        two_a,
        value: ComplexHP::from_parts(re, im),
    })
}

/// Hurwitz class number with the convention `H(0) = -1/12`.
pub fn hurwitz(d: i64) -> Rational64 {
    if d == 0 {
        return Rational64::new(-1, 12);
    }
    if d < 0 {
        return Rational64::from_integer(0);
    }
    enumerate_reduced(d)
        .iter()
        .map(|q| {
            let s = stabilizer_order(q).expect("reduced forms are positive definite");
            Rational64::new(1, s as i64)
        })
        .fold(Rational64::from_integer(0), |acc, x| acc + x)
}

fn is_squarefree(n: i64) -> bool {
    let mut m = n;
    let mut p = 2i64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Whether `-d` is a fundamental discriminant.
pub fn is_fundamental(d: i64) -> bool {
    if d < 1 {
        return false;
    }
    if d % 4 == 3 {
        return is_squarefree(d);
    }
    if d % 4 == 0 {
        let m = d / 4;
        // -d = 4 * (-m), needs -m = 2, 3 mod 4
        return is_squarefree(m) && (m % 4 == 1 || m % 4 == 2);
    }
    false
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}
