//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values are produced here by routes that share no code with the
//! library: product and divisor-sum q-expansions, brute-force form counts,
//! `f64` CM evaluation and direct matrix arithmetic.

use cmtrace::analytic::{duke_window, poincare_coeffs, regularized_average, trace, trace_table, FSpec};
use cmtrace::qexp::{g_series, plus_space_solve, predicted_series, QSeries};
use cmtrace::qform::hurwitz;
use cmtrace::thetalift::{disc_form_of, fourier_extract, theta_integral, theta_kernel, weil_rep, LatticeSpec};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------- oracles

/// Truncated power series with integer coefficients, index = exponent.
fn mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            c[i + j] += x * y;
        }
    }
    c
}

fn inverse(a: &[BigInt], n: usize) -> Vec<BigInt> {
    assert!(a[0].is_one());
    let mut b = vec![BigInt::zero(); n];
    b[0] = BigInt::one();
    for k in 1..n {
        let mut s = BigInt::zero();
        for i in 1..=k.min(a.len() - 1) {
            s += &a[i] * &b[k - i];
        }
        b[k] = -s;
    }
    b
}

/// `prod (1 - x^n)` from the pentagonal number theorem, in the variable `q^step`.
fn pentagonal(step: usize, n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n];
    for k in 0i64.. {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = (kk * (3 * kk - 1) / 2) as usize * step;
            if e < n {
                c[e] += if kk % 2 == 0 { 1 } else { -1 };
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    c
}

fn sigma(n: u64, k: u32) -> BigInt {
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| BigInt::from(d).pow(k)).sum()
}

/// `-eta(t)^2 E4(4t) / (eta(2t) eta(4t)^6)` through `q^(n-2)`, returned as the
/// coefficient list of `q * g`. Uses `eta(t)^2 / eta(2t) = sum (-1)^k q^(k^2)`.
fn g_oracle(n: usize) -> Vec<BigInt> {
    let mut theta = vec![BigInt::zero(); n];
    for k in 0i64.. {
        let e = (k * k) as usize;
        if e >= n {
            break;
        }
        theta[e] += if k == 0 { 1 } else if k % 2 == 0 { 2 } else { -2 };
    }
    let mut e4 = vec![BigInt::zero(); n];
    e4[0] = BigInt::one();
    for m in 1..n {
        if 4 * m < n {
            e4[4 * m] = 240 * sigma(m as u64, 3);
        }
    }
    let p6 = (0..6).fold(vec![BigInt::one()], |acc, _| mul(&acc, &pentagonal(4, n), n));
    let r = mul(&mul(&theta, &e4, n), &inverse(&p6, n), n);
    r.into_iter().map(|c| -c).collect()
}

/// Reduced forms `(a, b, c)` with `b^2 - 4ac = -D`, listed by brute force.
fn reduced_forms(d: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= d {
        for b in -a + 1..=a {
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            out.push((a, b, c));
        }
        a += 1;
    }
    out
}

fn weight(f: (i64, i64, i64)) -> Rational64 {
    let (a, b, c) = f;
    if a == b && b == c {
        Rational64::new(1, 3)
    } else if b == 0 && a == c {
        Rational64::new(1, 2)
    } else {
        Rational64::one()
    }
}

fn brute_h(d: i64) -> Rational64 {
    if d == 0 {
        return Rational64::new(-1, 12);
    }
    reduced_forms(d).into_iter().map(weight).sum()
}

/// `j(z)` from `E4^3 / Delta` evaluated as products in `f64`.
fn j_f64(z: Complex64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * z).exp();
    let mut e4 = Complex64::new(1.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..60u64 {
        qn *= q;
        let s3: f64 = (1..=n).filter(|d| n % d == 0).map(|d| (d * d * d) as f64).sum();
        e4 += 240.0 * s3 * qn;
        prod *= (Complex64::new(1.0, 0.0) - qn).powi(24);
    }
    e4 * e4 * e4 / (q * prod)
}

fn trace_f64(d: i64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    reduced_forms(d)
        .into_iter()
        .map(|form| {
            let alpha = Complex64::new(-form.1 as f64, (d as f64).sqrt()) / (2 * form.0) as f64;
            weight(form).to_f64().unwrap() * f(alpha).re
        })
        .sum()
}

/// `e^(s/2) beta(s)` with `beta(s) = int_1^oo t^(-3/2) e^(-s t) dt = 2 int_0^1 e^(-s/w^2) dw`, Simpson's rule.
fn scaled_beta(s: f64) -> f64 {
    let n = 4000;
    let h = 1.0 / n as f64;
    let f = |w: f64| if w == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { (s / 2.0 - s / (w * w)).exp() };
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * acc * h / 3.0
}

/// `sum_D H(D) e^(-pi D v / 2) + (1/(8 pi sqrt v)) sum_N beta(pi N^2 v) e^(pi N^2 v / 2)` at `sigma = i v`.
fn eisen_oracle(v: f64) -> f64 {
    let mut s = 0.0;
    for d in (0..400i64).filter(|d| matches!(d % 4, 0 | 3)) {
        s += brute_h(d).to_f64().unwrap() * (-PI * d as f64 * v / 2.0).exp();
    }
    let mut b = scaled_beta(0.0);
    for n in 1..20i64 {
        b += 2.0 * scaled_beta(PI * (n * n) as f64 * v);
    }
    s + b / (8.0 * PI * v.sqrt())
}

fn exp_sum_s(d: i64, c: i64) -> f64 {
    (0..c).filter(|x| (x * x + d).rem_euclid(c) == 0).map(|x| (4.0 * PI * x as f64 / c as f64).cos()).sum()
}

fn is_fundamental(d: i64) -> bool {
    let squarefree = |n: i64| (2..).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0);
    match d % 4 {
        3 => squarefree(d),
        0 => matches!((d / 4) % 4, 1 | 2) && squarefree(d / 4),
        _ => false,
    }
}

fn faber_j(m: u32, j: Complex64) -> Complex64 {
    let jj = j - 744.0;
    match m {
        1 => jj,
        2 => jj * jj - 393768.0,
        3 => jj * jj * jj - 3.0 * 196884.0 * jj - 3.0 * 21493760.0,
        _ => unreachable!(),
    }
}

fn plus_solution(m: i64, trunc: i64) -> Result<QSeries, String> {
    let a: BTreeMap<i64, BigRational> = [(m, int(1))].into_iter().collect();
    let pp = predicted_series(&a, 1).map_err(|e| e.to_string())?;
    plus_space_solve(&pp, trunc).map_err(|e| e.to_string())
}

// -------------------------------------------------------------- criteria

fn zagier() -> Outcome {
    let g = g_oracle(503);
    let ds: Vec<i64> = (1..=500).collect();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (d, e) in ds.iter().zip(trace_table(&FSpec::big_j(), &ds, 1, None)) {
        let e = e.map_err(|e| e.to_string())?;
        worst = worst.max(e.residual);
        if e.residual >= 1e-6 || e.value_rounded != BigRational::from_integer(g[*d as usize + 1].clone()) {
            bad.push(*d);
        }
    }
    let anchors = [(3, -248), (4, 492), (7, -4119), (8, 7256)]
        .iter()
        .all(|&(d, t)| g[d + 1] == BigInt::from(t));
    let head = g[0] == BigInt::from(-1) && g[1] == BigInt::from(2);
    Ok((bad.is_empty() && anchors && head, format!("D <= 500: mismatches {bad:?}, max residual {worst:.1e}")))
}

fn faber_level() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for m in [2u32, 3] {
        let s = plus_solution(m as i64, 201)?;
        let ds: Vec<i64> = (1..=200).collect();
        let f = FSpec::faber(m).map_err(|e| e.to_string())?;
        let mut bad = 0;
        for (d, e) in ds.iter().zip(trace_table(&f, &ds, 1, None)) {
            let e = e.map_err(|e| e.to_string())?;
            if e.residual >= 1e-6 || e.value_rounded != s.coeff_int(*d).map_err(|e| e.to_string())? {
                bad += 1;
            }
        }
        // the f64 CM sum agrees with the solved coefficients where it has the digits
        let mut rel: f64 = 0.0;
        for d in (3..=40).filter(|d| matches!(d % 4, 0 | 3)) {
            let want = s.coeff_int(d).map_err(|e| e.to_string())?.to_f64().unwrap();
            let got = trace_f64(d, |z| faber_j(m, j_f64(z)));
            rel = rel.max((got - want).abs() / want.abs().max(1.0));
        }
        let constant = s.coeff_int(0).map_err(|e| e.to_string())?;
        let want_const = BigRational::from_integer(2 * sigma(m as u64, 1));
        ok &= bad == 0 && rel < 1e-9 && constant == want_const;
        notes.push(format!("J{m}: {bad} mismatches, f64 CM rel {rel:.1e}, constant {constant}"));
    }
    Ok((ok, notes.join("; ")))
}

fn hurwitz_coherence() -> Outcome {
    let bad: Vec<i64> = (0..=10_000).filter(|&d| hurwitz(d) != brute_h(d)).collect();
    // sum_{t^2 <= 4n} H(4n - t^2) = 2 sigma(n) - sum_{d | n} min(d, n/d)
    let mut rel_bad = 0;
    for n in 1..=300i64 {
        let mut lhs = Rational64::zero();
        let mut t = -((4 * n) as f64).sqrt() as i64;
        while t * t <= 4 * n {
            lhs += hurwitz(4 * n - t * t);
            t += 1;
        }
        let rhs: i64 = 2 * (1..=n).filter(|d| n % d == 0).sum::<i64>() - (1..=n).filter(|d| n % d == 0).map(|d| d.min(n / d)).sum::<i64>();
        rel_bad += (lhs != Rational64::from_integer(rhs)) as usize;
    }
    Ok((bad.is_empty() && rel_bad == 0, format!("{} count mismatches for D <= 10^4, {rel_bad} class number relation failures, H(0) = {}", bad.len(), hurwitz(0))))
}

fn atkin() -> Outcome {
    let j = regularized_average(&FSpec::big_j(), 1e-7).map_err(|e| e.to_string())?;
    let one = regularized_average(&FSpec::one(), 1e-9).map_err(|e| e.to_string())?;
    Ok(((j.value + 24.0).abs() < 1e-3 && (one.value - 1.0).abs() < 1e-6, format!("avg(J) = {:.9}, avg(1) = {:.12}", j.value, one.value)))
}

fn poincare() -> Outcome {
    let c = poincare_coeffs(4, 1, &[1, 2], 100_000, 128).map_err(|e| e.to_string())?;
    let (v1, v2) = (c[0].value.to_f64(), c[1].value.to_f64());
    Ok(((v1 - 141444.0).abs() < 0.5 && (v2 - 68234240.0).abs() < 5.0, format!("n = 1: {v1:.4}, n = 2: {v2:.4}")))
}

fn exact_formula() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for d in (3..=200).filter(|&d| is_fundamental(d)) {
        let t = trace(&FSpec::big_j(), d, 1, None).map_err(|e| e.to_string())?.value_rounded.to_f64().unwrap();
        let h = brute_h(d).to_f64().unwrap();
        let dev = (t + 24.0 * h - exp_sum_s(d, 4) * (PI * (d as f64).sqrt()).sinh()).abs();
        let bound = 10.0 * (0.6 * PI * (d as f64).sqrt()).exp();
        worst = worst.max(dev / bound);
        ok &= dev < bound;
    }
    let lib = cmtrace::analytic::exact_formula_tj(3, 4, 128).map_err(|e| e.to_string())?.to_f64();
    let mine = -24.0 / 3.0 + exp_sum_s(3, 4) * (PI * 3f64.sqrt()).sinh();
    ok &= (lib - mine).abs() < 1e-9 && (lib + 238.76).abs() < 0.01;
    Ok((ok, format!("max deviation / bound {worst:.3}; D = 3 single term {lib:.4}")))
}

fn asymptotic() -> Outcome {
    let ds: Vec<i64> = (3..=200).filter(|d| matches!(d % 4, 0 | 3)).collect();
    let mut worst: f64 = 0.0;
    for (d, e) in ds.iter().zip(trace_table(&FSpec::big_j(), &ds, 1, None)) {
        let t = e.map_err(|e| e.to_string())?.value_rounded.to_f64().unwrap();
        let r = (d as &i64).to_f64().unwrap().sqrt() * PI;
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max((t - sign * r.exp()).abs() / (0.8 * r).exp());
    }
    Ok((worst < 1.0, format!("max |t_J(D) - (-1)^D e^(pi sqrt D)| / e^(0.8 pi sqrt D) = {worst:.3e}")))
}

fn duke() -> Outcome {
    let mut ws = Vec::new();
    for (lo, hi) in [(500, 1000), (2000, 4000), (8000, 10000)] {
        ws.push(duke_window(lo, hi, 64).map_err(|e| e.to_string())?);
    }
    let dist: Vec<f64> = ws.iter().map(|w| (w.mean + 24.0).abs()).collect();
    let strict = dist.windows(2).all(|p| p[1] < p[0]);
    let widened = (1..3).all(|k| dist[k] <= dist[k - 1] + 2.0 * ws[k].std_err);
    let in_band = (-30.0..=-18.0).contains(&ws[2].mean);
    let means: Vec<String> = ws.iter().map(|w| format!("{:.3} (se {:.2}, n {})", w.mean, w.std_err, w.count)).collect();
    Ok((
        (strict || widened) && in_band,
        format!(
            "means {}; strict monotone {}; monotone within 2 standard errors {}; last window in [-30, -18] {}",
            means.join(", "),
            if strict { "PASS" } else { "FAIL" },
            if widened { "PASS" } else { "FAIL" },
            if in_band { "PASS" } else { "FAIL" }
        ),
    ))
}

fn theta_one() -> Outcome {
    let d = disc_form_of(&LatticeSpec::level4()).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for v in [1.0, 2.0] {
        let tau = Complex64::new(0.0, v);
        let i0 = theta_integral(&d, 0, tau, &FSpec::one(), 1e-3).map_err(|e| e.to_string())?;
        let i1 = theta_integral(&d, 1, tau, &FSpec::one(), 1e-3).map_err(|e| e.to_string())?;
        let got = 0.5 * (i0.value() + i1.value());
        let want = eisen_oracle(v);
        let rel = (got - want).norm() / want.abs();
        ok &= rel < 0.01;
        notes.push(format!("v = {v}: {:.8} vs {want:.8} (rel {rel:.1e})", got.re));
    }
    Ok((ok, notes.join("; ")))
}

fn theta_j() -> Outcome {
    let d = disc_form_of(&LatticeSpec::level4()).map_err(|e| e.to_string())?;
    // coset 1 carries q = 3/4 mod 1, coset 0 carries integers
    let h3 = (0..d.len()).find(|&h| d.qvals[h] == Rational64::new(3, 4)).ok_or("no coset with q = 3/4")?;
    let h0 = (0..d.len()).find(|&h| d.qvals[h].is_zero()).ok_or("no coset with q = 0")?;
    let c3 = fourier_extract(&d, h3, Rational64::new(3, 4), 1.0, &FSpec::big_j(), 8, 1e-3).map_err(|e| e.to_string())?;
    let c4 = fourier_extract(&d, h0, Rational64::one(), 1.0, &FSpec::big_j(), 8, 1e-3).map_err(|e| e.to_string())?;
    let ok = (c3.re + 248.0).abs() < 0.02 * 248.0 && (c4.re - 492.0).abs() < 0.02 * 492.0;
    Ok((ok, format!("D = 3: {:.5}, D = 4: {:.5}", c3.re, c4.re)))
}

fn decay() -> Outcome {
    let d = disc_form_of(&LatticeSpec::level4()).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for h in 0..d.len() {
        let mut l = [0.0; 3];
        for (i, y) in [2.0, 4.0, 6.0].into_iter().enumerate() {
            l[i] = theta_kernel(&d, h, Complex64::i(), Complex64::new(0.0, y), 1e-200).map_err(|e| e.to_string())?.norm().ln();
        }
        let (d1, d2) = (l[1] - l[0], l[2] - l[1]);
        // a Gaussian e^(-C y^2) has second difference -8C on step 2; the
        // shortest nonzero dual vector at tau = i predicts C = pi
        let c = -(d2 - d1) / 8.0;
        ok &= d1 < 0.0 && d2 < d1 && c > 0.5 * PI && c < 1.5 * PI;
        notes.push(format!("h = {h}: diffs {d1:.2}, {d2:.2}, C = {c:.3}"));
    }
    Ok((ok, notes.join("; ")))
}

type M = Vec<Vec<Complex64>>;

fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn max_diff(a: &M, b: &M) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm())).fold(0.0, f64::max)
}

fn weil() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let eps = 2f64.powi(-40);
    for spec in [LatticeSpec::level4(), LatticeSpec::level4p(2).map_err(|e| e.to_string())?] {
        let d = disc_form_of(&spec).map_err(|e| e.to_string())?;
        let w = weil_rep(&d).map_err(|e| e.to_string())?;
        let n = w.t.len();
        // T is diagonal with entries e(q(h))
        let mut t_bad: f64 = 0.0;
        for h in 0..n {
            let q = d.qvals[h].to_f64().unwrap();
            t_bad = t_bad.max((w.t[h] - Complex64::from_polar(1.0, 2.0 * PI * q)).norm());
        }
        let t: M = (0..n).map(|i| (0..n).map(|j| if i == j { w.t[i] } else { Complex64::zero() }).collect()).collect();
        let s = w.s.clone();
        let s_adj: M = (0..n).map(|i| (0..n).map(|j| s[j][i].conj()).collect()).collect();
        let id: M = (0..n).map(|i| (0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::zero() }).collect()).collect();
        let unitary = max_diff(&matmul(&s, &s_adj), &id).max(w.t.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max));
        let st = matmul(&s, &t);
        let braid = max_diff(&matmul(&matmul(&st, &st), &st), &matmul(&s, &s));
        ok &= unitary < eps && braid < eps && t_bad < eps;
        notes.push(format!("{} ({} cosets): unitarity {unitary:.1e}, (ST)^3 - S^2 {braid:.1e}", spec.name, n));
    }
    Ok((ok, notes.join("; ")))
}

fn plus_support() -> Outcome {
    let trunc = 201;
    let mut series = vec![("g".to_string(), g_series(trunc).map_err(|e| e.to_string())?)];
    for m in 1..=3 {
        series.push((format!("plus(J{m})"), plus_solution(m, trunc)?));
    }
    let mut bad = Vec::new();
    for (name, s) in &series {
        for n in 0..=200 {
            if matches!(n % 4, 1 | 2) && !s.coeff_int(n).map_err(|e| e.to_string())?.is_zero() {
                bad.push(format!("{name} at q^{n}"));
            }
        }
    }
    Ok((bad.is_empty(), format!("{} series through q^200, violations {bad:?}", series.len())))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: [&[&str]; 6] = [
        &["trace", "--range", "3:150"],
        &["classnum", "--range", "1:2000"],
        &["forms", "--D", "71", "--level", "3"],
        &["series", "--name", "g", "--trunc", "300"],
        &["duke", "--range", "500:700"],
        &["poincare", "--cmax", "2000"],
    ];
    let mut diffs = Vec::new();
    for cmd in commands {
        let mut outs = Vec::new();
        for (threads, format) in [("1", "json"), ("4", "json"), ("1", "csv"), ("4", "csv")] {
            let path = dir.path().join(format!("{}-{threads}.{format}", cmd[0]));
            let mut argv = vec!["cmtrace", "--no-cache", "--threads", threads, "--format", format, "--out", path.to_str().unwrap()];
            argv.extend_from_slice(cmd);
            let code = cmtrace::cli::run(argv);
            if code != 0 {
                return Err(format!("{} exited with {code}", cmd.join(" ")));
            }
            outs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outs[0] != outs[1] || outs[2] != outs[3] || outs[0].is_empty() {
            diffs.push(cmd[0]);
        }
    }
    Ok((diffs.is_empty(), format!("{} commands in json and csv, 1 vs 4 threads; differing: {diffs:?}", commands.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("zagier identity for D <= 500", zagier),
        ("faber-level identity for J2, J3", faber_level),
        ("hurwitz coherence", hurwitz_coherence),
        ("atkin functional", atkin),
        ("poincare coefficients", poincare),
        ("exact formula first term", exact_formula),
        ("asymptotic law", asymptotic),
        ("duke trend", duke),
        ("theta lift of 1", theta_one),
        ("theta lift of J", theta_j),
        ("kernel decay", decay),
        ("weil representation", weil),
        ("plus-space support", plus_support),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += (!pass) as usize;
        println!("{:>2} {} {name} [{:.1}s]: {detail}", i + 1, if pass { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
