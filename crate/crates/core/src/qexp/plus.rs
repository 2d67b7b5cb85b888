//! Principal parts predicted for trace generating series, and exact solving
//! for weight 3/2 plus-space forms on `Gamma_0(4)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::classical::{eta_quotient, g_series, j_series, sigma1};
use super::QSeries;
use crate::error::{Error, Result};

/// Negative-exponent coefficients plus an optional constant term.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrincipalPart {
    pub coeffs: BTreeMap<i64, BigRational>,
    pub constant: Option<BigRational>,
}

impl PrincipalPart {
    pub fn from_ints(terms: &[(i64, i64)]) -> Result<PrincipalPart> {
        let mut coeffs = BTreeMap::new();
        for &(e, c) in terms {
            if e >= 0 {
                return Err(Error::InvalidPrincipalPart(format!("exponent {e} is not negative")));
            }
            if c != 0 {
                coeffs.insert(e, BigRational::from_integer(BigInt::from(c)));
            }
        }
        Ok(PrincipalPart { coeffs, constant: None })
    }

    /// Largest pole order, zero if there is none.
    pub fn order(&self) -> i64 {
        self.coeffs.keys().next().map(|e| -e).unwrap_or(0)
    }
}

fn r64_to_big(x: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// Principal part and constant of the trace generating series of a weight 0
/// function with principal coefficients `a(-n)` (keyed by `n >= 0`), for
/// level `p` (1 or a prime).
pub fn predicted_series(a: &BTreeMap<i64, BigRational>, p: u64) -> Result<PrincipalPart> {
    if p != 1 && !crate::qform::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a.keys().any(|&n| n < 0) {
        return Err(Error::InvalidPrincipalPart("indices n of a(-n) must be nonnegative".into()));
    }
    if a.get(&0).is_some_and(|c| !c.is_zero()) {
        return Err(Error::NonzeroConstant(a[&0].to_string()));
    }
    let p = p as i64;
    let mut constant = BigRational::zero();
    for (&n, c) in a {
        let s = sigma1(Rational64::from_integer(n)) + sigma1(Rational64::new(n, p)) * p;
        constant += r64_to_big(s) * c;
    }
    let mut coeffs: BTreeMap<i64, BigRational> = BTreeMap::new();
    for (&k, c) in a.iter().filter(|(k, _)| **k > 0) {
        // k = m n contributes -m a(-k) at q^(-m^2) for each divisor m
        for m in (1..=k).filter(|m| k % m == 0) {
            *coeffs.entry(-m * m).or_insert_with(BigRational::zero) -= c * BigRational::from_integer(m.into());
        }
    }
    coeffs.retain(|_, v| !v.is_zero());
    Ok(PrincipalPart { coeffs, constant: Some(constant) })
}

/// Result of an exact linear solve.
struct Solved {
    solution: Option<Vec<BigRational>>,
    nullspace: Vec<Vec<BigRational>>,
    rank: usize,
}

/// Solves `m x = b` by Gauss-Jordan elimination over the rationals.
fn solve(m: &[Vec<BigRational>], b: &[BigRational], ncols: usize) -> Solved {
    let mut rows: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = rows[rank][col].recip();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let consistent = rows[rank..].iter().all(|r| r[ncols].is_zero());
    let solution = consistent.then(|| {
        let mut x = vec![BigRational::zero(); ncols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = rows[i][ncols].clone();
        }
        x
    });
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -rows[i][f].clone();
            }
            v
        })
        .collect();
    Solved { solution, nullspace, rank }
}

/// Seed forms of weight 3/2 on `Gamma_0(4)`: `g` and `theta^3` times powers of
/// `j(4 tau)`, and `theta^3` times powers of the Hauptmoduln
/// `u = (eta(tau)/eta(4 tau))^8` and `u + 16`, which reach the other cusps.
fn seeds(n_max: i64, extra: i64, trunc: i64) -> Result<Vec<(String, QSeries)>> {
    let tr = Rational64::from_integer(trunc);
    let pad = Rational64::from_integer(trunc + 4 * (n_max + extra) + 8);
    let theta3 = eta_quotient(&[(2, 5), (1, -2), (4, -2)], pad)?.pow(3)?;
    let g = g_series(trunc + 4 * (n_max + 2))?;
    let j4 = j_series(trunc / 4 + n_max + 4)?.scale_q(4);
    let mut out = Vec::new();
    let kmax = n_max / 4 + 1;
    let mut jp = QSeries::one(pad);
    for k in 0..=kmax {
        out.push((format!("g*j(4t)^{k}"), g.mul(&jp).truncate(tr)));
        out.push((format!("theta^3*j(4t)^{k}"), theta3.mul(&jp).truncate(tr)));
        jp = jp.mul(&j4);
    }
    let u = eta_quotient(&[(1, 8), (4, -8)], pad)?;
    let w = u.add_const(&BigRational::from_integer(BigInt::from(16)));
    let (ui, wi) = (u.inv()?, w.inv()?);
    let (mut up, mut uip, mut wip) = (u.clone(), ui.clone(), wi.clone());
    for a in 1..=n_max + extra {
        out.push((format!("theta^3*u^{a}"), theta3.mul(&up).truncate(tr)));
        out.push((format!("theta^3*u^-{a}"), theta3.mul(&uip).truncate(tr)));
        out.push((format!("theta^3*(u+16)^-{a}"), theta3.mul(&wip).truncate(tr)));
        up = up.mul(&u);
        uip = uip.mul(&ui);
        wip = wip.mul(&wi);
    }
    Ok(out)
}

/// Diagnostics for a solve attempt, reported on failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub seeds: usize,
    pub constraints: usize,
    pub rank: usize,
    pub consistent: bool,
    pub ambiguous: bool,
}

/// The weight 3/2 plus-space form on `Gamma_0(4)` with principal part `pp`,
/// known below `q^trunc`.
///
/// Coefficients at exponents `= 1, 2 (mod 4)` are forced to vanish and the
/// prescribed negative coefficients are matched exactly; the constant term is
/// whatever the solution has. The seed family is enlarged a few times before
/// giving up.
pub fn plus_space_solve(pp: &PrincipalPart, trunc: i64) -> Result<QSeries> {
    for &e in pp.coeffs.keys() {
        if e >= 0 {
            return Err(Error::InvalidPrincipalPart(format!("exponent {e} is not negative")));
        }
        if !matches!(e.rem_euclid(4), 0 | 3) {
            return Err(Error::InvalidPrincipalPart(format!("q^{e} violates the plus condition")));
        }
    }
    if trunc < 1 {
        return Err(Error::InvalidArgument("trunc must be positive".into()));
    }
    let n = pp.order();
    if n == 0 {
        return Ok(QSeries::zero_raw(1, trunc));
    }
    let mut last = None;
    for extra in [2, 4, 8] {
        match solve_with(pp, trunc, n, extra) {
            Ok(s) => return Ok(s),
            Err(d) => last = Some(d),
        }
    }
    let d = last.expect("at least one attempt");
    Err(Error::SolveFailed(format!(
        "seed span does not realize the principal part: {} seeds, {} constraints, rank {}, consistent {}, ambiguous {}",
        d.seeds, d.constraints, d.rank, d.consistent, d.ambiguous
    )))
}

fn solve_with(pp: &PrincipalPart, out_trunc: i64, n: i64, extra: i64) -> std::result::Result<QSeries, SolveDiagnostics> {
    // enough support conditions to pin down every seed coefficient
    let nseeds = 2 * (n / 4 + 2) + 3 * (n + extra);
    let trunc = out_trunc.max(2 * nseeds + n + 40);
    let fail = |seeds, constraints, rank, consistent, ambiguous| SolveDiagnostics {
        seeds,
        constraints,
        rank,
        consistent,
        ambiguous,
    };
    let seeds = seeds(n, extra, trunc).map_err(|_| fail(0, 0, 0, false, false))?;
    let low = -(n + extra);
    let mut targets = Vec::new();
    for e in low..trunc {
        if e < 0 {
            targets.push((e, pp.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero)));
        } else if matches!(e.rem_euclid(4), 1 | 2) {
            targets.push((e, BigRational::zero()));
        }
    }
    let m: Vec<Vec<BigRational>> = targets
        .iter()
        .map(|(e, _)| seeds.iter().map(|(_, s)| s.coeff_int(*e).unwrap_or_else(|_| BigRational::zero())).collect())
        .collect();
    let b: Vec<BigRational> = targets.iter().map(|(_, v)| v.clone()).collect();
    let sol = solve(&m, &b, seeds.len());
    let Some(x) = sol.solution else {
        return Err(fail(seeds.len(), targets.len(), sol.rank, false, false));
    };
    let combine = |v: &[BigRational]| {
        let mut acc = QSeries::zero_raw(1, trunc);
        for (c, (_, s)) in v.iter().zip(&seeds) {
            if !c.is_zero() {
                acc = acc.add(&s.scale(c));
            }
        }
        acc
    };
    if sol.nullspace.iter().any(|v| combine(v).valuation().is_some()) {
        return Err(fail(seeds.len(), targets.len(), sol.rank, true, true));
    }
    Ok(combine(&x).truncate(Rational64::from_integer(out_trunc)))
}

/// Whether every known coefficient at an exponent `= 1, 2 (mod 4)` vanishes.
pub fn satisfies_plus_condition(s: &QSeries) -> bool {
    s.terms().all(|(e, _)| !(e.is_integer() && matches!(e.to_integer().rem_euclid(4), 1 | 2)))
        && s.terms().all(|(e, _)| e.is_integer())
}
