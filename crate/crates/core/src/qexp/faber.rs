//! Forms `q^-m + O(q)` built from polynomials in `j`.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::classical::{eisenstein, j_series};
use super::QSeries;
use crate::error::{Error, Result};

/// A polynomial in `j` with exact coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JPoly {
    pub coeffs: Vec<BigRational>,
}

impl JPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Whether every coefficient is an integer and the top one is 1.
    pub fn is_monic_integral(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one()) && self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Value at a point given by a Horner-style closure over its own type.
    pub fn eval_with<T: Clone>(&self, x: &T, from: impl Fn(&BigRational) -> T, add: impl Fn(&T, &T) -> T, mul: impl Fn(&T, &T) -> T) -> T {
        let mut it = self.coeffs.iter().rev();
        let mut acc = from(it.next().expect("nonempty polynomial"));
        for c in it {
            acc = add(&mul(&acc, x), &from(c));
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.eval_with(x, |c| c.clone(), |a, b| a + b, |a, b| a * b)
    }

    /// `j` itself.
    pub fn j() -> JPoly {
        JPoly { coeffs: vec![BigRational::zero(), BigRational::one()] }
    }

    /// `j - 744`.
    pub fn big_j() -> JPoly {
        JPoly { coeffs: vec![BigRational::from_integer(BigInt::from(-744)), BigRational::one()] }
    }
}

impl std::fmt::Display for JPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c < &BigRational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            let sign = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let body = super::series::rational_string(&mag);
            let term = match k {
                0 => body,
                _ if mag.is_one() => if k == 1 { "j".to_string() } else { format!("j^{k}") },
                1 => format!("{body}*j"),
                _ => format!("{body}*j^{k}"),
            };
            write!(f, "{sign}{term}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A weakly holomorphic form together with the polynomial that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Faber {
    pub m: u32,
    pub weight: u32,
    pub poly: JPoly,
    pub series: QSeries,
}

/// `base * j^i` for `i = 0..=m`, each known below `q^trunc`.
fn j_power_ladder(base: &QSeries, m: u32, trunc: i64) -> Result<Vec<QSeries>> {
    let j = j_series(trunc + m as i64)?;
    let mut out = vec![base.clone()];
    for _ in 0..m {
        let next = out.last().unwrap().mul(&j);
        out.push(next);
    }
    Ok(out.into_iter().map(|s| s.truncate(Rational64::from_integer(trunc))).collect())
}

/// Eliminates `q^-(m-1), ..., q^0` from `ladder[m]` using lower rungs.
fn eliminate(ladder: &[QSeries], m: u32) -> Result<(JPoly, QSeries)> {
    let mut coeffs = vec![BigRational::zero(); m as usize + 1];
    coeffs[m as usize] = BigRational::one();
    let mut s = ladder[m as usize].clone();
    for k in (0..m).rev() {
        let c = s.coeff_int(-(k as i64))?;
        if !c.is_zero() {
            s = s.sub(&ladder[k as usize].scale(&c));
            coeffs[k as usize] -= &c;
        }
    }
    Ok((JPoly { coeffs }, s))
}

/// The Faber function `J_m = q^-m + O(q)`, a monic polynomial in `j`,
/// known below `q^trunc`.
pub fn faber(m: u32, trunc: i64) -> Result<Faber> {
    if m == 0 {
        return Err(Error::InvalidArgument("faber index must be at least 1".into()));
    }
    let one = QSeries::one(Rational64::from_integer(trunc + m as i64));
    let ladder = j_power_ladder(&one, m, trunc)?;
    let (poly, series) = eliminate(&ladder, m)?;
    Ok(Faber { m, weight: 0, poly, series })
}

/// The weight `k` form `f_m = q^-m + O(q)` as `E_k` times a polynomial in `j`.
///
/// Weight 12 is refused since `Delta` would make the form non-unique.
pub fn weight_basis(k: u32, m: u32, trunc: i64) -> Result<Faber> {
    if m == 0 {
        return Err(Error::InvalidArgument("basis index must be at least 1".into()));
    }
    if !matches!(k, 4 | 6 | 8 | 10 | 14) {
        return Err(Error::UnsupportedWeight(k as i64));
    }
    let ek = eisenstein(k, trunc + m as i64)?;
    let ladder = j_power_ladder(&ek, m, trunc)?;
    let (poly, series) = eliminate(&ladder, m)?;
    Ok(Faber { m, weight: k, poly, series })
}
