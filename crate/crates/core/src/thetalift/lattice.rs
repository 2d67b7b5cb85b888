//! Trace-zero matrices, the lattices inside them and the Kudla-Millson scalar.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qform::QuadForm;

/// `X = [[x1, x2], [x3, -x1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeVector {
    pub entries: [f64; 3],
}

impl LatticeVector {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        LatticeVector { entries: [x1, x2, x3] }
    }

    pub fn from_rationals(x: [Rational64; 3]) -> Self {
        let f = |r: Rational64| r.to_f64().unwrap_or(f64::NAN);
        LatticeVector::new(f(x[0]), f(x[1]), f(x[2]))
    }

    pub fn zero() -> Self {
        LatticeVector::new(0.0, 0.0, 0.0)
    }

    /// `[[a, b], [c, d]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let [x1, x2, x3] = self.entries;
        [[x1, x2], [x3, -x1]]
    }

    /// `q(X) = det X`.
    pub fn q(&self) -> f64 {
        let [x1, x2, x3] = self.entries;
        -x1 * x1 - x2 * x3
    }

    /// `(X, Y) = -tr(XY)`.
    pub fn bilinear(&self, o: &LatticeVector) -> f64 {
        let [x1, x2, x3] = self.entries;
        let [y1, y2, y3] = o.entries;
        -2.0 * x1 * y1 - x2 * y3 - x3 * y2
    }

    pub fn add(&self, o: &LatticeVector) -> LatticeVector {
        LatticeVector::new(self.entries[0] + o.entries[0], self.entries[1] + o.entries[1], self.entries[2] + o.entries[2])
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector::new(-self.entries[0], -self.entries[1], -self.entries[2])
    }

    pub fn scale(&self, s: f64) -> LatticeVector {
        LatticeVector::new(s * self.entries[0], s * self.entries[1], s * self.entries[2])
    }

    /// Conjugation action `g X g^-1` of `g` in `SL_2(R)`.
    pub fn act(&self, g: [[f64; 2]; 2]) -> LatticeVector {
        let m = self.matrix();
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let gi = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut r = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            r
        };
        let r = mul(mul(g, m), gi);
        LatticeVector::new(r[0][0], r[0][1], r[1][0])
    }
}

/// `X(z) = (1/y) [[-x, |z|^2], [-1, x]]`.
pub fn x_of_z(z: Complex64) -> Result<LatticeVector> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidArgument(format!("{z} is not in the upper half-plane")));
    }
    let (x, y) = (z.re, z.im);
    Ok(LatticeVector::new(-x / y, z.norm_sqr() / y, -1.0 / y))
}

/// `X_Q = [[-B/2, -C], [A, B/2]]`, of norm `D/4`.
pub fn vector_of_form(f: &QuadForm) -> Result<LatticeVector> {
    if f.a <= 0 || f.disc() >= 0 {
        return Err(Error::NotPositiveDefinite { a: f.a, b: f.b, c: f.c });
    }
    Ok(LatticeVector::new(-(f.b as f64) / 2.0, -(f.c as f64), f.a as f64))
}

/// `(X, X(z))^2 - (X, X)`, a positive definite quadratic form in `X`.
pub fn majorant(v: &LatticeVector, z: Complex64) -> Result<f64> {
    let xz = x_of_z(z)?;
    let p = v.bilinear(&xz);
    Ok(p * p - v.bilinear(v))
}

/// The coefficient of `dx dy / y^2` in the Kudla-Millson form at `(X, tau, z)`:
/// `(v (X, X(z))^2 - 1/(2 pi)) e^(-pi v majorant) e(q(X) u)`.
pub fn km_value(v: &LatticeVector, tau: Complex64, z: Complex64) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(Error::InvalidArgument(format!("{tau} is not in the upper half-plane")));
    }
    let xz = x_of_z(z)?;
    let p = v.bilinear(&xz);
    let maj = p * p - v.bilinear(v);
    let amp = (tau.im * p * p - 1.0 / (2.0 * PI)) * (-PI * tau.im * maj).exp();
    Ok(Complex64::from_polar(amp, 2.0 * PI * v.q() * tau.re))
}

/// A lattice `{(x1, x2, x3) : x_i in s_i Z}` in the trace-zero matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub name: String,
    pub steps: [i64; 3],
}

impl LatticeSpec {
    /// `[[b, c], [a, -b]]` with `a, b, c` integers.
    pub fn level4() -> Self {
        LatticeSpec { name: "level4".into(), steps: [1, 1, 1] }
    }

    /// `[[b, 2c], [2ap, -b]]` with `a, b, c` integers.
    pub fn level4p(p: u64) -> Result<Self> {
        if !crate::qform::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(LatticeSpec { name: format!("level4p({p})"), steps: [1, 2, 2 * p as i64] })
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "level4" {
            return Ok(LatticeSpec::level4());
        }
        if let Some(p) = s.strip_prefix("level4p(").and_then(|r| r.strip_suffix(')')) {
            let p: u64 = p.parse().map_err(|_| Error::InvalidArgument(format!("bad lattice {s}")))?;
            return LatticeSpec::level4p(p);
        }
        Err(Error::InvalidArgument(format!("unknown lattice {s}; use level4 or level4p(p)")))
    }

    /// Gram matrix of `(.,.)` in the basis `s_i e_i`.
    pub fn gram(&self) -> [[i64; 3]; 3] {
        let [a1, a2, a3] = self.steps;
        [[-2 * a1 * a1, 0, 0], [0, 0, -a2 * a3], [0, -a2 * a3, 0]]
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        v.entries.iter().zip(self.steps).all(|(x, s)| {
            let r = x / s as f64;
            (r - r.round()).abs() < 1e-9
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_point() {
        let x = x_of_z(Complex64::i()).unwrap();
        assert_eq!(x.matrix(), [[0.0, 1.0], [-1.0, 0.0]]);
        assert!((x.q() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn form_vector() {
        let x = vector_of_form(&QuadForm::new(1, 0, 1).unwrap()).unwrap();
        assert_eq!(x.matrix(), [[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(x.q(), 1.0);
        // X_Q is proportional to X(alpha_Q): |(X_Q, X(alpha_Q))| = sqrt(D)
        let f = QuadForm::new(1, 1, 1).unwrap();
        let alpha = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let p = vector_of_form(&f).unwrap().bilinear(&x_of_z(alpha).unwrap());
        assert!((p.abs() - 3f64.sqrt()).abs() < 1e-14);
        assert!(vector_of_form(&QuadForm { a: -1, b: 0, c: -1 }).is_err());
    }

    #[test]
    fn majorant_values() {
        let z = Complex64::new(0.3, 1.7);
        assert_eq!(majorant(&LatticeVector::zero(), z).unwrap(), 0.0);
        let xz = x_of_z(z).unwrap();
        assert!((majorant(&xz, z).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_scalar() {
        let z = Complex64::new(0.2, 1.1);
        let zero = km_value(&LatticeVector::zero(), Complex64::i(), z).unwrap();
        assert!((zero.re + 1.0 / (2.0 * PI)).abs() < 1e-15 && zero.im == 0.0);
        let at = km_value(&x_of_z(Complex64::i()).unwrap(), Complex64::i(), Complex64::i()).unwrap();
        let expect = (4.0 - 1.0 / (2.0 * PI)) * (-2.0 * PI).exp();
        assert!((at.re - expect).abs() < 1e-15 && at.im.abs() < 1e-15);
    }

    #[test]
    fn gram_matrices() {
        assert_eq!(LatticeSpec::level4().gram(), [[-2, 0, 0], [0, 0, -1], [0, -1, 0]]);
        assert_eq!(LatticeSpec::level4p(2).unwrap().gram(), [[-2, 0, 0], [0, 0, -8], [0, -8, 0]]);
        assert!(LatticeSpec::level4p(4).is_err());
        assert_eq!(LatticeSpec::parse("level4p(3)").unwrap().steps, [1, 2, 6]);
    }
}
