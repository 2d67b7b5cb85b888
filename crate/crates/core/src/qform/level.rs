//! Orbits of forms `[a, b, c]` with `p | a` under `Gamma_0(p)` and its
//! extension by the Fricke involution.

use serde::{Deserialize, Serialize};

use super::{enumerate_reduced, reduce_with_matrix, stabilizer_elements, stabilizer_order, Mat2, QuadForm};
use crate::error::{Error, Result};

/// The group an orbit representative is taken under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupTag {
    FullModular,
    FrickeExtended(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRep {
    pub form: QuadForm,
    pub stabilizer_order: u32,
    pub group_tag: GroupTag,
}

/// Identifies a `Gamma_0(p)` class: the reduced form of its `SL_2(Z)` orbit and
/// a canonical point of `P^1(F_p)` (encoded as `0..p`, with `p` for infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId {
    pub reduced: QuadForm,
    pub point: u64,
}

fn inv_mod(a: i64, p: i64) -> i64 {
    let (mut r0, mut r1) = (a.rem_euclid(p), p);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p)
}

fn point_of(x: i64, y: i64, p: i64) -> u64 {
    let (x, y) = (x.rem_euclid(p), y.rem_euclid(p));
    if y == 0 {
        p as u64
    } else {
        ((x * inv_mod(y, p)).rem_euclid(p)) as u64
    }
}

fn point_coords(pt: u64, p: i64) -> (i64, i64) {
    if pt as i64 == p {
        (1, 0)
    } else {
        (pt as i64, 1)
    }
}

/// Matrix in `SL_2(Z)` whose first column reduces to the given point.
fn coset_matrix(pt: u64, p: i64) -> Mat2 {
    if pt as i64 == p {
        Mat2::IDENTITY
    } else {
        Mat2([[pt as i64, -1], [1, 0]])
    }
}

fn apply_point(s: &Mat2, pt: u64, p: i64) -> u64 {
    let (x, y) = point_coords(pt, p);
    let m = s.0;
    point_of(m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y, p)
}

/// The Fricke involution on forms: `[a, b, c] -> [pc, -b, a/p]`.
pub fn fricke(form: &QuadForm, p: u64) -> QuadForm {
    let p = p as i64;
    debug_assert_eq!(form.a % p, 0);
    QuadForm { a: p * form.c, b: -form.b, c: form.a / p }
}

/// Canonical `Gamma_0(p)` class of a form with `p | a`.
pub fn class_id(form: &QuadForm, p: u64) -> Result<ClassId> {
    let pi = p as i64;
    if form.a % pi != 0 {
        return Err(Error::InvalidArgument(format!("{form} does not have a divisible by {p}")));
    }
    let (red, g) = reduce_with_matrix(form)?;
    // form = red o g^-1, so the coset is read off the first column of g^-1
    let gi = g.inverse_sl2();
    let pt = point_of(gi.0[0][0], gi.0[1][0], pi);
    let point = stabilizer_elements(&red).iter().map(|s| apply_point(s, pt, pi)).min().unwrap_or(pt);
    Ok(ClassId { reduced: red, point })
}

/// `Gamma_0(p)` classes of discriminant `-d` with `p | a`: canonical id, a
/// representative and its stabilizer order in `PSL_2`.
pub fn gamma0_classes(d: i64, p: u64) -> Result<Vec<(ClassId, QuadForm, u32)>> {
    if !super::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pi = p as i64;
    let mut out = Vec::new();
    for red in enumerate_reduced(d) {
        let stab = stabilizer_elements(&red);
        let mut seen = std::collections::BTreeSet::new();
        for pt in 0..=p {
            let (x, y) = point_coords(pt, pi);
            if red.eval(x, y).rem_euclid(pi) != 0 {
                continue;
            }
            let orbit: Vec<u64> = stab.iter().map(|s| apply_point(s, pt, pi)).collect();
            let canon = *orbit.iter().min().unwrap();
            if !seen.insert(canon) {
                continue;
            }
            let fixing = orbit.iter().filter(|&&q| q == pt).count() as u32;
            let form = red.act(&coset_matrix(canon, pi));
            out.push((ClassId { reduced: red, point: canon }, form, fixing));
        }
    }
    out.sort_by_key(|(id, _, _)| *id);
    Ok(out)
}

/// Orbit representatives of forms of discriminant `-d` with `p | a` under
/// `Gamma_0^*(p)` (or `SL_2(Z)` when `p = 1`), with stabilizer orders.
///
/// Classes swapped by the Fricke involution are folded into one orbit; a class
/// it fixes gets its stabilizer doubled.
pub fn level_p_orbits(d: i64, p: u64) -> Result<Vec<OrbitRep>> {
    if p == 1 {
        return enumerate_reduced(d)
            .into_iter()
            .map(|f| {
                Ok(OrbitRep { form: f, stabilizer_order: stabilizer_order(&f)?, group_tag: GroupTag::FullModular })
            })
            .collect();
    }
    let classes = gamma0_classes(d, p)?;
    let mut done = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (id, form, stab) in &classes {
        if done.contains(id) {
            continue;
        }
        let partner = class_id(&fricke(form, p), p)?;
        done.insert(*id);
        done.insert(partner);
        let order = if partner == *id { 2 * stab } else { *stab };
        out.push(OrbitRep { form: *form, stabilizer_order: order, group_tag: GroupTag::FrickeExtended(p) });
    }
    Ok(out)
}
