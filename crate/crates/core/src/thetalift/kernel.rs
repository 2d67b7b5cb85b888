//! The theta kernel `theta_h(tau, z) = sum_{X in h + L} phi(X, tau, z)`.
//!
//! Summed directly the series converges only slowly in `y`: the vectors with
//! `x3 = 0` contribute about `y` terms each and their sum cancels. Poisson
//! summation over `x2` turns those into Gaussians in `y`. Writing
//! `w = x3 conj(tau) + xi` and `s = x3 |z|^2 - 2 x1 x`, the resummed series is
//!
//! `sum_{x1, x3, xi} (1/s2) e(xi c2) e(-xi s) e(-conj(tau)(x1^2 + x3 s))
//!     (y / sqrt v) (-w^2 y^2 / v) exp(-pi y^2 w^2 / v)`
//!
//! with `xi` in `Z / s2`. Its terms satisfy
//! `|exp(...)| = exp(-pi y^2 (x3 u + xi)^2 / v - pi v x3^2 y^2 - 2 pi v (x1 - x3 x)^2)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::lattice::{km_value, LatticeVector};
use super::weil::DiscForm;
use crate::error::{Error, Result};

/// Maximum number of terms in one kernel evaluation.
pub const KERNEL_BUDGET: usize = 5_000_000;

fn check_args(d: &DiscForm, h: usize, tau: Complex64, z: Complex64, tol: f64) -> Result<()> {
    if h >= d.len() {
        return Err(Error::InvalidArgument(format!("coset {h} out of range (|L#/L| = {})", d.len())));
    }
    if !(tau.im > 0.0 && z.im > 0.0) {
        return Err(Error::InvalidArgument("tau and z must lie in the upper half-plane".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    Ok(())
}

/// Exponent cut-off: terms with `|exp| < e^-R` are dropped.
fn radius(tol: f64, tau: Complex64, z: Complex64) -> f64 {
    let (v, y) = (tau.im, z.im);
    -tol.ln() + 3.0 * (2.0 + y).ln() + 2.0 * (2.0 + 1.0 / v).ln() + 2.0 * (2.0 + v).ln() + 12.0
}

/// Integers `n` with `c + a n` in `[lo, hi]`.
fn range(c: f64, a: f64, lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    ((lo - c) / a).ceil() as i64..=((hi - c) / a).floor() as i64
}

/// `theta_h(tau, z)` by the Poisson-resummed series, as the coefficient of
/// `dx dy / y^2`; terms below `tol` times a polynomial margin are dropped.
pub fn theta_kernel(d: &DiscForm, h: usize, tau: Complex64, z: Complex64, tol: f64) -> Result<Complex64> {
    check_args(d, h, tau, z, tol)?;
    let r = radius(tol, tau, z);
    theta_kernel_radius(d, h, tau, z, r)
}

pub(crate) fn theta_kernel_radius(d: &DiscForm, h: usize, tau: Complex64, z: Complex64, r: f64) -> Result<Complex64> {
    let (u, v) = (tau.re, tau.im);
    let (x, y) = (z.re, z.im);
    let tb = tau.conj();
    let [a1, a2, a3] = d.steps().map(|s| s as f64);
    let [c1, c2, c3] = d.offset(h);
    let pref = y / v.sqrt() / a2;
    let zz = z.norm_sqr();
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let x3max = (r / (PI * v)).sqrt() / y;
    let mut total = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for n3 in range(c3, a3, -x3max, x3max) {
        let x3 = c3 + a3 * n3 as f64;
        let r3 = r - PI * v * x3 * x3 * y * y;
        if r3 < 0.0 {
            continue;
        }
        let w1 = (r3 / (2.0 * PI * v)).sqrt();
        for n1 in range(c1, a1, x3 * x - w1, x3 * x + w1) {
            let x1 = c1 + a1 * n1 as f64;
            let r1 = r3 - 2.0 * PI * v * (x1 - x3 * x).powi(2);
            if r1 < 0.0 {
                continue;
            }
            let s = x3 * zz - 2.0 * x1 * x;
            let base = -two_pi_i * tb * (x1 * x1 + x3 * s);
            let wk = (r1 * v / PI).sqrt() / y;
            // xi = k / a2 with |x3 u + xi| <= wk
            for k in range(0.0, 1.0 / a2, -x3 * u - wk, -x3 * u + wk) {
                count += 1;
                if count > KERNEL_BUDGET {
                    return Err(Error::BudgetExceeded(format!("theta kernel at z = {z} needs more than {KERNEL_BUDGET} terms")));
                }
                let xi = k as f64 / a2;
                let w = x3 * tb + xi;
                let w2 = w * w;
                if w2.norm() == 0.0 {
                    continue;
                }
                let phase = two_pi_i * (xi * c2 - xi * s);
                let expo = base + phase - PI * y * y * w2 / v;
                total += -w2 * (y * y / v) * expo.exp();
            }
        }
    }
    Ok(total * pref)
}

/// `theta_h(tau, z)` summed directly over lattice vectors with
/// `pi v majorant <= R`; only practical for `y` near 1.
pub fn theta_kernel_direct(d: &DiscForm, h: usize, tau: Complex64, z: Complex64, tol: f64) -> Result<Complex64> {
    check_args(d, h, tau, z, tol)?;
    let r = radius(tol, tau, z);
    let m = r / (PI * tau.im);
    let (x, y) = (z.re, z.im);
    let [a1, a2, a3] = d.steps().map(|s| s as f64);
    let [c1, c2, c3] = d.offset(h);
    // majorant = (p + y x3)^2 + x3^2 y^2 + 2 (x1 - x3 x)^2 with p = (X, X(z))
    let x3max = m.sqrt() / y;
    let mut total = Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for n3 in range(c3, a3, -x3max, x3max) {
        let x3 = c3 + a3 * n3 as f64;
        let m3 = m - x3 * x3 * y * y;
        if m3 < 0.0 {
            continue;
        }
        let w1 = (m3 / 2.0).sqrt();
        for n1 in range(c1, a1, x3 * x - w1, x3 * x + w1) {
            let x1 = c1 + a1 * n1 as f64;
            let m1 = m3 - 2.0 * (x1 - x3 * x).powi(2);
            if m1 < 0.0 {
                continue;
            }
            let rp = m1.sqrt();
            let shift = x3 * z.norm_sqr() - 2.0 * x1 * x;
            let lo = y * (-y * x3 - rp) + shift;
            let hi = y * (-y * x3 + rp) + shift;
            for n2 in range(c2, a2, lo, hi) {
                count += 1;
                if count > KERNEL_BUDGET {
                    return Err(Error::BudgetExceeded(format!("direct theta sum at z = {z} needs more than {KERNEL_BUDGET} terms")));
                }
                let v = LatticeVector::new(x1, c2 + a2 * n2 as f64, x3);
                total += km_value(&v, tau, z)?;
            }
        }
    }
    Ok(total)
}
