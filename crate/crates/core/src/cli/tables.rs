//! Row types and builders for the table-producing commands.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::analytic::{duke_statistic, poincare_coeffs, trace, FSpec};
use crate::error::{Error, Result};
use crate::qexp::{
    big_j_series, eisenstein, eta, g_series, j_series, plus_space_solve, predicted_series, rational_string, theta_series,
    QSeries,
};
use crate::qform::{enumerate_reduced, hurwitz, is_fundamental, level_p_orbits, stabilizer_order, GroupTag};

fn r64(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Positive discriminants `D = 0, 3 (mod 4)` in `[lo, hi]`.
pub fn discriminants(lo: i64, hi: i64) -> Vec<i64> {
    (lo.max(1)..=hi).filter(|d| matches!(d.rem_euclid(4), 0 | 3)).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub p: u64,
    pub f: String,
    /// Exact value as `num/den`.
    pub trace: String,
    pub residual: f64,
    /// Working precision in bits.
    pub precision: usize,
}

pub fn trace_rows(f: &FSpec, ds: &[i64], p: u64, precision: Option<usize>) -> Result<Vec<TraceRow>> {
    let rows: Vec<Result<TraceRow>> = ds
        .par_iter()
        .map(|&d| {
            let e = trace(f, d, p, precision)?;
            Ok(TraceRow {
                d,
                p,
                f: e.f,
                trace: rational_string(&e.value_rounded),
                residual: e.residual,
                precision: e.value_numeric.prec(),
            })
        })
        .collect();
    rows.into_iter().collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassRow {
    #[serde(rename = "D")]
    pub d: i64,
    #[serde(rename = "H")]
    pub h: String,
    /// Number of reduced forms, primitive or not.
    pub forms: usize,
    pub fundamental: bool,
}

pub fn class_rows(ds: &[i64]) -> Vec<ClassRow> {
    ds.par_iter()
        .map(|&d| ClassRow { d, h: r64(hurwitz(d)), forms: if d > 0 { enumerate_reduced(d).len() } else { 0 }, fundamental: is_fundamental(d) })
        .collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FormRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub p: u64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub stabilizer: u32,
    pub group: String,
}

pub fn form_rows(d: i64, p: u64) -> Result<Vec<FormRow>> {
    if p == 1 {
        return enumerate_reduced(d)
            .into_iter()
            .map(|f| Ok(FormRow { d, p, a: f.a, b: f.b, c: f.c, stabilizer: stabilizer_order(&f)?, group: "SL2(Z)".into() }))
            .collect();
    }
    Ok(level_p_orbits(d, p)?
        .into_iter()
        .map(|o| FormRow {
            d,
            p,
            a: o.form.a,
            b: o.form.b,
            c: o.form.c,
            stabilizer: o.stabilizer_order,
            group: match o.group_tag {
                GroupTag::FullModular => "SL2(Z)".into(),
                GroupTag::FrickeExtended(p) => format!("Gamma0*({p})"),
            },
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DukeRow {
    #[serde(rename = "D")]
    pub d: i64,
    pub statistic: f64,
    #[serde(rename = "H")]
    pub h: String,
    pub fundamental: bool,
}

pub fn duke_rows(ds: &[i64], precision: usize) -> Result<Vec<DukeRow>> {
    let rows: Vec<Result<DukeRow>> = ds
        .par_iter()
        .map(|&d| Ok(DukeRow { d, statistic: duke_statistic(d, precision)?.to_f64(), h: r64(hurwitz(d)), fundamental: is_fundamental(d) }))
        .collect();
    rows.into_iter().collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PoincareRow {
    pub k: u32,
    pub m: u64,
    pub n: u64,
    pub c_max: u64,
    pub value: f64,
    pub tail_estimate: f64,
}

pub fn poincare_rows(k: u32, m: u64, ns: &[u64], c_max: u64, precision: usize) -> Result<Vec<PoincareRow>> {
    Ok(poincare_coeffs(k, m, ns, c_max, precision)?
        .into_iter()
        .map(|c| PoincareRow { k: c.k, m: c.m, n: c.n, c_max: c.c_max, value: c.value.to_f64(), tail_estimate: c.tail_estimate })
        .collect())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SeriesRow {
    pub exponent: String,
    pub coeff: String,
}

/// Named q-series: `j`, `J`, `g`, `theta`, `eta`, `E<k>`, `J<m>`, `T<p>` and
/// `plus-J<m>` (the plus-space form whose coefficients are the traces of `J_m`).
pub fn named_series(name: &str, trunc: i64) -> Result<QSeries> {
    let bad = || Error::InvalidArgument(format!("unknown series {name}"));
    let t = Rational64::from_integer(trunc);
    match name {
        "j" => return j_series(trunc),
        "J" => return big_j_series(trunc),
        "g" => return g_series(trunc),
        "theta" => return theta_series(trunc),
        "eta" => return eta(t),
        _ => {}
    }
    if let Some(k) = name.strip_prefix('E') {
        let k: u32 = k.parse().map_err(|_| bad())?;
        return eisenstein(k, trunc);
    }
    if let Some(m) = name.strip_prefix("plus-J") {
        let m: i64 = if m.is_empty() { 1 } else { m.parse().map_err(|_| bad())? };
        let a: BTreeMap<i64, BigRational> = [(m, BigRational::from_integer(BigInt::from(1)))].into_iter().collect();
        let pp = predicted_series(&a, 1)?;
        return plus_space_solve(&pp, trunc);
    }
    if name.starts_with('J') || name.starts_with('T') {
        return FSpec::parse(name)?.q_series(trunc);
    }
    Err(bad())
}

pub fn series_rows(s: &QSeries) -> Vec<SeriesRow> {
    s.terms().map(|(e, c)| SeriesRow { exponent: r64(e), coeff: rational_string(c) }).collect()
}
