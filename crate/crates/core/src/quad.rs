//! Numerical quadrature: adaptive Gauss-Kronrod, Gauss-Legendre rules and
//! high-precision tanh-sinh.

use crate::analytic::hp::RealHP;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns the estimate and `|K15 - G7|`.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Globally adaptive Gauss-Kronrod: bisects the panel with the largest error
/// until the summed error drops below `max(abs_tol, rel_tol |I|)` or
/// `max_panels` is reached.
pub fn adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> QuadResult {
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    panels.push((a, b, v, e));
    let mut evals = 15;
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return QuadResult { value: total, err, evals, converged: true };
        }
        if panels.len() >= max_panels {
            return QuadResult { value: total, err, evals, converged: false };
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, _, _) = panels.swap_remove(i);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, m);
        let (v2, e2) = gk15(&mut f, m, pb);
        evals += 30;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
        // keep summation order independent of the bisection history
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed Gauss-Legendre rule mapped to `[a, b]`.
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Tanh-sinh quadrature of `f` on `[0, 1]` at `prec` bits, refining the step
/// until two levels agree; the returned error is that difference plus the
/// accumulated rounding error.
pub fn tanh_sinh_unit(f: impl Fn(&RealHP) -> RealHP, prec: usize, max_level: u32) -> Option<RealHP> {
    let half = RealHP::from_ratio(1, 2, prec);
    let pi_half = RealHP::pi(prec).mul(&half);
    let tiny = 2f64.powi(-(prec as i32) - 4);
    // abscissas x = (1 + tanh(pi/2 sinh t)) / 2, weights pi/4 cosh t / cosh^2(pi/2 sinh t)
    let node = |t: &RealHP| -> Option<(RealHP, RealHP, RealHP)> {
        let et = t.exp();
        let emt = RealHP::from_i64(1, prec).div(&et);
        let sinh = et.sub(&emt).mul(&half);
        let cosh = et.add(&emt).mul(&half);
        let u = pi_half.mul(&sinh);
        let eu = u.exp();
        let emu = RealHP::from_i64(1, prec).div(&eu);
        let ch = eu.add(&emu).mul(&half);
        // 1 - x and x written without cancellation
        let one_minus_x = emu.div(&eu.add(&emu));
        let x = eu.div(&eu.add(&emu));
        let w = pi_half.mul(&cosh).div(&ch.mul(&ch)).mul(&half);
        if w.abs_f64() < tiny {
            return None;
        }
        Some((x, one_minus_x, w))
    };
    let mut h = RealHP::from_i64(1, prec);
    let eval_level = |h: &RealHP, odd_only: bool| -> RealHP {
        let mut sum = RealHP::zero(prec);
        let mut k = if odd_only { 1i64 } else { 0 };
        let step = if odd_only { 2 } else { 1 };
        loop {
            let t = h.mul_i64(k);
            let Some((x, omx, w)) = node(&t) else { break };
            sum = sum.add(&f(&x).mul(&w));
            if k > 0 {
                sum = sum.add(&f(&omx).mul(&w));
            }
            k += step;
            if k > 100_000 {
                break;
            }
        }
        sum
    };
    let mut total = eval_level(&h, false);
    let mut est = total.mul(&h);
    for _ in 0..max_level {
        h = h.mul(&half);
        total = total.add(&eval_level(&h, true));
        let next = total.mul(&h);
        let diff = next.sub(&est).abs_f64();
        est = next;
        if diff < est.abs_f64().max(1e-300) * 2f64.powi(-(prec as i32) + 8) || diff == 0.0 {
            return Some(est.with_extra_err(diff));
        }
        if diff < 2f64.powi(-(prec as i32)) {
            return Some(est.with_extra_err(diff));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_exact() {
        let r = adaptive(|x| x.powi(20) - 3.0 * x, -1.0, 2.0, 1e-13, 0.0, 50);
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 1.5 * 3.0;
        assert!((r.value - exact).abs() < 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-10, 0.0, 200);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn legendre_rule() {
        let rule = gauss_legendre(20);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let v = gl_integrate(|x| x.exp(), 0.0, 1.0, &rule);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_hp() {
        // integral of 1/(1+x^2) over [0,1] = pi/4
        let prec = 200;
        let v = tanh_sinh_unit(|x| RealHP::from_i64(1, prec).div(&RealHP::from_i64(1, prec).add(&x.mul(x))), prec, 12).unwrap();
        let quarter_pi = RealHP::pi(prec).div(&RealHP::from_i64(4, prec));
        let d = v.sub(&quarter_pi).abs_f64();
        assert!(d < 1e-50, "{d}");
    }
}
