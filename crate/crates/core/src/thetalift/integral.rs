//! The theta integral `I_h(tau, f) = int_M f(z) theta_h(tau, z)` and its Fourier coefficients.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::kernel::theta_kernel;
use super::weil::DiscForm;
use crate::analytic::{beta_f64, j_f64, FSpec};
use crate::error::{Error, Result};
use crate::qexp::JPoly;
use crate::qform::hurwitz;
use crate::quad::gauss_legendre;

/// Height separating the compact part of the fundamental domain from the cusp strip.
const SPLIT: f64 = 2.0;
const ORDERS: [usize; 6] = [16, 24, 32, 48, 64, 96];
const MAX_HEIGHT: f64 = 60.0;

/// A numerical value of `I_h(tau, f)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaIntegral {
    pub re: f64,
    pub im: f64,
    /// Estimated quadrature error.
    pub err: f64,
    /// Height at which the cusp strip was cut.
    pub height: f64,
    /// Kernel evaluations used.
    pub evals: usize,
}

impl ThetaIntegral {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn poly_f64(poly: &JPoly, z: Complex64) -> Complex64 {
    if poly.coeffs.len() == 1 {
        return Complex64::new(poly.coeffs[0].to_f64().unwrap_or(f64::NAN), 0.0);
    }
    let j = j_f64(z);
    poly.eval_with(&j, |c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0), |a, b| a + b, |a, b| a * b)
}

fn integrand(d: &DiscForm, h: usize, tau: Complex64, poly: &JPoly, z: Complex64, tol: f64) -> Result<Complex64> {
    let fz = poly_f64(poly, z);
    let k = theta_kernel(d, h, tau, z, tol / (1.0 + fz.norm()))?;
    Ok(fz * k / (z.im * z.im))
}

fn sum_ordered(v: Vec<Result<Complex64>>) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for t in v {
        s += t?;
    }
    Ok(s)
}

/// Tensor Gauss-Legendre rule of order `n` on `|x| <= 1/2`, `sqrt(1 - x^2) <= y <= SPLIT`.
fn compact(d: &DiscForm, h: usize, tau: Complex64, poly: &JPoly, n: usize, tol: f64) -> Result<Complex64> {
    let (t, w) = gauss_legendre(n);
    let nodes: Vec<(Complex64, f64)> = t
        .iter()
        .zip(&w)
        .flat_map(|(tx, wx)| {
            let x = 0.5 * tx;
            let lo = (1.0 - x * x).sqrt();
            let hy = 0.5 * (SPLIT - lo);
            let cy = 0.5 * (SPLIT + lo);
            t.iter().zip(&w).map(move |(ty, wy)| (Complex64::new(x, cy + hy * ty), 0.5 * wx * hy * wy)).collect::<Vec<_>>()
        })
        .collect();
    sum_ordered(nodes.par_iter().map(|&(z, wt)| integrand(d, h, tau, poly, z, tol).map(|v| v * wt)).collect())
}

/// Trapezoid rule in `x` (the integrand has period 1) times Gauss-Legendre on `[y0, y0 + 1]`.
fn strip_panel(d: &DiscForm, h: usize, tau: Complex64, poly: &JPoly, y0: f64, nx: usize, ny: usize, tol: f64) -> Result<Complex64> {
    let (t, w) = gauss_legendre(ny);
    let mut nodes = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = -0.5 + (i as f64 + 0.5) / nx as f64;
        for (ty, wy) in t.iter().zip(&w) {
            nodes.push((Complex64::new(x, y0 + 0.5 + 0.5 * ty), 0.5 * wy / nx as f64));
        }
    }
    sum_ordered(nodes.par_iter().map(|&(z, wt)| integrand(d, h, tau, poly, z, tol).map(|v| v * wt)).collect())
}

fn cusp(d: &DiscForm, h: usize, tau: Complex64, poly: &JPoly, nx: usize, ny: usize, tol: f64) -> Result<(Complex64, f64)> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut y0 = SPLIT;
    let mut small = 0;
    while y0 < MAX_HEIGHT {
        let p = strip_panel(d, h, tau, poly, y0, nx, ny, tol)?;
        total += p;
        y0 += 1.0;
        // stop after two consecutive negligible panels past the peak of |f theta|
        if p.norm() < 1e-3 * tol {
            small += 1;
            if small == 2 {
                return Ok((total, y0));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::ToleranceNotMet(format!("cusp strip still contributes at height {MAX_HEIGHT}")))
}

/// `I_h(tau, f)` for `f` a polynomial in `j`: the part of the fundamental
/// domain below `y = 2` by tensor Gauss-Legendre rules of increasing order,
/// the strip above it in unit panels until the kernel's decay has overtaken
/// the growth of `f`. Orders are raised until consecutive results agree to `tol`.
pub fn theta_integral(d: &DiscForm, h: usize, tau: Complex64, f: &FSpec, tol: f64) -> Result<ThetaIntegral> {
    let FSpec::Poly { poly, .. } = f else {
        return Err(Error::InvalidArgument(format!("theta integrals are implemented for polynomials in j, not {f}")));
    };
    if !(tau.im > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("need Im tau > 0 and tol > 0".into()));
    }
    if h >= d.len() {
        return Err(Error::InvalidArgument(format!("coset {h} out of range")));
    }
    let ktol = 1e-3 * tol;
    let mut evals = 0;
    let mut prev: Option<Complex64> = None;
    let mut comp = None;
    for &n in &ORDERS {
        let c = compact(d, h, tau, poly, n, ktol)?;
        evals += n * n;
        if let Some(p) = prev {
            let e = (c - p).norm();
            if e < 0.5 * tol {
                comp = Some((c, e));
                break;
            }
        }
        prev = Some(c);
    }
    let (c, ce) = comp.ok_or_else(|| Error::ToleranceNotMet(format!("compact part unresolved at order {}", ORDERS[ORDERS.len() - 1])))?;
    let mut prev: Option<Complex64> = None;
    let mut strip = None;
    for (nx, ny) in [(16, 12), (32, 16), (64, 24), (128, 32)] {
        let (s, height) = cusp(d, h, tau, poly, nx, ny, ktol)?;
        evals += nx * ny * (height - SPLIT) as usize;
        if let Some(p) = prev {
            let e = (s - p).norm();
            if e < 0.5 * tol {
                strip = Some((s, e, height));
                break;
            }
        }
        prev = Some(s);
    }
    let (s, se, height) = strip.ok_or_else(|| Error::ToleranceNotMet("cusp strip unresolved".into()))?;
    let v = c + s;
    Ok(ThetaIntegral { re: v.re, im: v.im, err: ce + se, height, evals })
}

/// `sum_{D <= trunc} H(D) e(D sigma / 4) + 1/(8 pi sqrt v) sum_N beta(pi N^2 v) e(-N^2 sigma / 4)`,
/// the expansion of `(I_0 + I_1)/2` for `f = 1` in the variable `sigma = tau`.
pub fn eisen_prediction(tau: Complex64, trunc: i64) -> Complex64 {
    let v = tau.im;
    let e4 = |m: f64| (Complex64::new(0.0, 2.0 * PI * m / 4.0) * tau).exp();
    let mut s = Complex64::new(0.0, 0.0);
    for d in 0..=trunc.max(0) {
        let h = hurwitz(d);
        if *h.numer() != 0 {
            s += e4(d as f64) * h.to_f64().unwrap_or(f64::NAN);
        }
    }
    let mut nsum = Complex64::new(beta_f64(0.0), 0.0);
    let mut n = 1i64;
    loop {
        let n2 = (n * n) as f64;
        // |beta(pi N^2 v) e(-N^2 tau / 4)| <= e^(-pi N^2 v / 2) / (pi N^2 v)
        let bound = (-PI * n2 * v / 2.0).exp() / (PI * n2 * v);
        if bound < 1e-18 {
            break;
        }
        nsum += e4(-n2) * (2.0 * beta_f64(PI * n2 * v));
        n += 1;
    }
    s + nsum / (8.0 * PI * v.sqrt())
}

/// An approximate Fourier coefficient of `I_h(., f)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FourierCoefficient {
    pub re: f64,
    pub im: f64,
    pub err: f64,
    /// Set when a principal-part exponent aliases onto `m` on this grid.
    pub aliasing: bool,
}

/// Half the coefficient of `e(m tau)` in `I_h(tau, f)`, from the average of
/// `I_h(u + iv, f) e(-m u)` over `grid` equally spaced `u` in `[0, 1)`.
/// For `f` without constant term and `m > 0` this approximates `t_f(D)` with `D = 4m`.
pub fn fourier_extract(d: &DiscForm, h: usize, m: Rational64, v: f64, f: &FSpec, grid: usize, tol: f64) -> Result<FourierCoefficient> {
    if h >= d.len() {
        return Err(Error::InvalidArgument(format!("coset {h} out of range")));
    }
    let diff = m - d.qvals[h];
    if !diff.is_integer() {
        return Err(Error::InvalidArgument(format!("m = {m} is not congruent to q(h) = {} mod 1", d.qvals[h])));
    }
    if !(v >= 1.0) || grid < 8 {
        return Err(Error::InvalidArgument("need v >= 1 and grid >= 8".into()));
    }
    let mf = m.to_f64().unwrap_or(f64::NAN);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for j in 0..grid {
        let u = j as f64 / grid as f64;
        let i = theta_integral(d, h, Complex64::new(u, v), f, tol)?;
        acc += i.value() * Complex64::from_polar(1.0, -2.0 * PI * mf * u);
        err += i.err;
    }
    let scale = 0.5 * (2.0 * PI * mf * v).exp() / grid as f64;
    let lowest = -((f.pole_order() as f64).powi(2)) / 4.0;
    let c = acc * scale;
    Ok(FourierCoefficient { re: c.re, im: c.im, err: err * scale, aliasing: mf - grid as f64 >= lowest })
}
