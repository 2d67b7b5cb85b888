//! Discriminant forms and the Weil representation.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::PI;

use super::lattice::{LatticeSpec, LatticeVector};
use crate::error::{Error, Result};

/// The finite quadratic module `L#/L`.
#[derive(Debug, Clone)]
pub struct DiscForm {
    /// Invariant factors `d_i > 1` of the Smith normal form.
    pub invariants: Vec<i64>,
    /// Representatives in matrix coordinates `(x1, x2, x3)`, the zero class first.
    pub elements: Vec<[Rational64; 3]>,
    /// `q(h) mod 1` in `[0, 1)`.
    pub qvals: Vec<Rational64>,
    pub signature_mod8: i64,
    gram: [[i64; 3]; 3],
    steps: [i64; 3],
}

fn frac(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// Smith normal form `U G V = diag(d)`; returns `d` and `U^-1`.
pub fn smith_normal_form(g: [[i64; 3]; 3]) -> ([i64; 3], [[i64; 3]; 3]) {
    let mut a = g;
    let mut uinv = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let n = 3;
    // row op "row i += c row j" on a means column op "col j -= c col i" on U^-1
    let row_add = |a: &mut [[i64; 3]; 3], u: &mut [[i64; 3]; 3], i: usize, j: usize, c: i64| {
        for k in 0..n {
            a[i][k] += c * a[j][k];
            u[k][j] -= c * u[k][i];
        }
    };
    let row_swap = |a: &mut [[i64; 3]; 3], u: &mut [[i64; 3]; 3], i: usize, j: usize| {
        a.swap(i, j);
        for row in u.iter_mut() {
            row.swap(i, j);
        }
    };
    let col_add = |a: &mut [[i64; 3]; 3], i: usize, j: usize, c: i64| {
        for row in a.iter_mut() {
            row[i] += c * row[j];
        }
    };
    let col_swap = |a: &mut [[i64; 3]; 3], i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut t = 0;
    while t < n {
        // pivot: smallest nonzero entry of the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..n {
            for j in t..n {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        row_swap(&mut a, &mut uinv, t, pi);
        col_swap(&mut a, t, pj);
        let mut clean = true;
        for i in t + 1..n {
            let q = Integer::div_floor(&a[i][t], &a[t][t]);
            row_add(&mut a, &mut uinv, i, t, -q);
            clean &= a[i][t] == 0;
        }
        for j in t + 1..n {
            let q = Integer::div_floor(&a[t][j], &a[t][t]);
            col_add(&mut a, j, t, -q);
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // the pivot must divide the rest of the block
        let mut bad = None;
        for i in t + 1..n {
            for j in t + 1..n {
                if a[i][j] % a[t][t] != 0 {
                    bad = Some(i);
                }
            }
        }
        if let Some(i) = bad {
            row_add(&mut a, &mut uinv, t, i, 1);
            continue;
        }
        if a[t][t] < 0 {
            for k in 0..n {
                a[t][k] = -a[t][k];
                uinv[k][t] = -uinv[k][t];
            }
        }
        t += 1;
    }
    ([a[0][0], a[1][1], a[2][2]], uinv)
}

fn inverse(g: [[i64; 3]; 3]) -> Option<[[Rational64; 3]; 3]> {
    let m = |i: usize, j: usize| g[i][j];
    let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    if det == 0 {
        return None;
    }
    let mut inv = [[Rational64::zero(); 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            let cof = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
            *e = Rational64::new(cof, det);
        }
    }
    Some(inv)
}

/// `L#/L` of a lattice, from the Smith normal form of its Gram matrix.
pub fn disc_form_of(spec: &LatticeSpec) -> Result<DiscForm> {
    let gram = spec.gram();
    let ginv = inverse(gram).ok_or_else(|| Error::InvalidArgument(format!("{} is degenerate", spec.name)))?;
    let (d, uinv) = smith_normal_form(gram);
    let mut elements = Vec::new();
    let total: i64 = d.iter().product::<i64>().abs();
    for idx in 0..total {
        // mixed-radix digits n_i in [0, d_i)
        let mut rest = idx;
        let mut nvec = [0i64; 3];
        for i in (0..3).rev() {
            nvec[i] = rest % d[i];
            rest /= d[i];
        }
        let y: Vec<i64> = (0..3).map(|i| (0..3).map(|k| uinv[i][k] * nvec[k]).sum()).collect();
        let mut x = [Rational64::zero(); 3];
        for i in 0..3 {
            let lam: Rational64 = (0..3).map(|k| ginv[i][k] * y[k]).sum();
            // coordinate in the basis s_i e_i, reduced mod the lattice
            let lam = frac(lam);
            x[i] = lam * spec.steps[i];
        }
        elements.push(x);
    }
    let mut form = DiscForm {
        invariants: d.iter().copied().filter(|&v| v > 1).collect(),
        qvals: Vec::new(),
        elements,
        signature_mod8: 0,
        gram,
        steps: spec.steps,
    };
    form.qvals = form.elements.iter().map(|x| frac(q_exact(x))).collect();
    form.signature_mod8 = form.milgram_signature()?;
    Ok(form)
}

fn q_exact(x: &[Rational64; 3]) -> Rational64 {
    -x[0] * x[0] - x[1] * x[2]
}

fn b_exact(x: &[Rational64; 3], y: &[Rational64; 3]) -> Rational64 {
    Rational64::from_integer(-2) * x[0] * y[0] - x[1] * y[2] - x[2] * y[1]
}

fn e(x: Rational64) -> Complex64 {
    let f = frac(x).to_f64().unwrap_or(f64::NAN);
    Complex64::from_polar(1.0, 2.0 * PI * f)
}

impl DiscForm {
    pub fn gram(&self) -> [[i64; 3]; 3] {
        self.gram
    }

    pub fn steps(&self) -> [i64; 3] {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(h, h') mod 1`.
    pub fn pairing(&self, i: usize, j: usize) -> Rational64 {
        frac(b_exact(&self.elements[i], &self.elements[j]))
    }

    /// Index of the class of `-h`.
    pub fn negate(&self, i: usize) -> usize {
        let x = self.elements[i];
        let neg = [-x[0], -x[1], -x[2]];
        self.index_of(&neg).expect("the group is closed under negation")
    }

    /// Index of the class containing `x`.
    pub fn index_of(&self, x: &[Rational64; 3]) -> Option<usize> {
        let red = |x: &[Rational64; 3]| -> [Rational64; 3] {
            let mut r = *x;
            for (i, v) in r.iter_mut().enumerate() {
                let s = Rational64::from_integer(self.steps[i]);
                *v = frac(*v / s) * s;
            }
            r
        };
        let target = red(x);
        self.elements.iter().position(|y| red(y) == target)
    }

    /// The class of a lattice vector of `L#`, if it lies in `L#`.
    pub fn class_of(&self, v: &LatticeVector) -> Option<usize> {
        let r = v.entries.map(|t| Rational64::approximate_float(t).unwrap_or_default());
        let x: [Rational64; 3] = [r[0], r[1], r[2]];
        self.index_of(&x)
    }

    pub fn offset(&self, i: usize) -> [f64; 3] {
        self.elements[i].map(|r| r.to_f64().unwrap_or(f64::NAN))
    }

    /// Signature mod 8 from Milgram's formula `sum e(q(h)) = sqrt|D| e(sig/8)`.
    fn milgram_signature(&self) -> Result<i64> {
        let s: Complex64 = self.qvals.iter().map(|&q| e(q)).sum();
        let n = (self.len() as f64).sqrt();
        if (s.norm() - n).abs() > 1e-8 * n {
            return Err(Error::InconsistentDiscForm(format!("Gauss sum has modulus {} instead of {n}", s.norm())));
        }
        let k = (s.arg() / (2.0 * PI) * 8.0).round() as i64;
        Ok(k.rem_euclid(8))
    }

    /// Checks that `q(h + h') - q(h) - q(h') = (h, h') mod 1` and that the
    /// pairing is symmetric, on all pairs.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in 0..self.len() {
                let (x, y) = (&self.elements[i], &self.elements[j]);
                let sum = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
                let lhs = frac(q_exact(&sum) - q_exact(x) - q_exact(y));
                if lhs != self.pairing(i, j) || self.pairing(i, j) != self.pairing(j, i) {
                    return Err(Error::InconsistentDiscForm(format!("pairing mismatch at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }
}

/// `rho_L(T)` (diagonal) and `rho_L(S)`; column `h` is the image of `e_h`.
#[derive(Debug, Clone)]
pub struct WeilRepMatrices {
    pub t: Vec<Complex64>,
    pub s: Vec<Vec<Complex64>>,
}

type Mat = Vec<Vec<Complex64>>;

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut r = vec![vec![Complex64::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::zero() {
                continue;
            }
            for j in 0..n {
                r[i][j] += aik * b[k][j];
            }
        }
    }
    r
}

fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl WeilRepMatrices {
    pub fn t_matrix(&self) -> Mat {
        let n = self.t.len();
        (0..n).map(|i| (0..n).map(|j| if i == j { self.t[i] } else { Complex64::zero() }).collect()).collect()
    }

    /// Largest entry of `M M^* - 1` over `M` in `{S, T}`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.t.len();
        let id: Mat = (0..n).map(|i| (0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::zero() }).collect()).collect();
        let star = |m: &Mat| -> Mat { (0..n).map(|i| (0..n).map(|j| m[j][i].conj()).collect()).collect() };
        let t = self.t_matrix();
        max_diff(&matmul(&self.s, &star(&self.s)), &id).max(max_diff(&matmul(&t, &star(&t)), &id))
    }

    /// Largest entry of `(ST)^3 - S^2`.
    pub fn braid_defect(&self) -> f64 {
        let st = matmul(&self.s, &self.t_matrix());
        let st3 = matmul(&matmul(&st, &st), &st);
        max_diff(&st3, &self.s_squared())
    }

    pub fn s_squared(&self) -> Mat {
        matmul(&self.s, &self.s)
    }
}

/// `rho(T) e_h = e(q(h)) e_h`, `rho(S) e_h = e(1/8) / sqrt|D| sum_h' e(-(h, h')) e_h'`.
pub fn weil_rep(d: &DiscForm) -> Result<WeilRepMatrices> {
    d.check()?;
    let n = d.len();
    let scale = e(Rational64::new(1, 8)) / (n as f64).sqrt();
    let t = d.qvals.iter().map(|&q| e(q)).collect();
    let s = (0..n).map(|i| (0..n).map(|j| scale * e(-d.pairing(i, j))).collect()).collect();
    Ok(WeilRepMatrices { t, s })
}
