//! Dense univariate polynomials over Q, lowest degree first.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn monic(&self) -> Poly {
        let l = self.lead().clone();
        Poly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Poly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    #[cfg(test)]
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(vec![]);
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let mut r = self.0.clone();
        let dd = d.degree();
        if self.0.len() < d.0.len() {
            return (Poly(vec![]), self.clone());
        }
        let mut q = vec![BigRational::zero(); self.0.len() - d.0.len() + 1];
        let lead = d.lead();
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] / lead;
            if !coef.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &coef * dc;
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Squarefree decomposition (Yun): factors paired with their multiplicity.
    pub fn squarefree(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree() > 0 {
            let a = b.gcd(&d);
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            if a.degree() > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    /// Number of distinct real roots via a Sturm sequence.
    pub fn real_root_count(&self) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(Poly(r.0.iter().map(|c| -c).collect()));
        }
        let changes = |signs: Vec<i8>| {
            let s: Vec<i8> = signs.into_iter().filter(|&x| x != 0).collect();
            s.windows(2).filter(|w| w[0] != w[1]).count()
        };
        let sign = |x: &BigRational| if x.is_positive() { 1i8 } else if x.is_negative() { -1 } else { 0 };
        let at_pos: Vec<i8> = seq.iter().map(|p| sign(p.lead())).collect();
        let at_neg: Vec<i8> =
            seq.iter().map(|p| sign(p.lead()) * if p.degree() % 2 == 1 { -1 } else { 1 }).collect();
        changes(at_neg) - changes(at_pos)
    }

    /// Coefficients scaled to unit max-norm, in `f64`.
    pub fn to_f64(&self) -> Vec<f64> {
        let m = self.0.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::one);
        self.0.iter().map(|c| (c / &m).to_f64().unwrap_or(0.0)).collect()
    }
}

/// Horner evaluation of real coefficients at a complex point, with derivative.
pub(crate) fn horner_c(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Eigenvalues of the companion matrix; coefficients lowest first, leading nonzero.
pub(crate) fn companion_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = c[n];
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    match nalgebra::Schur::try_new(m, f64::EPSILON, 500) {
        Some(s) => s.complex_eigenvalues().iter().copied().collect(),
        None => aberth(c),
    }
}

/// Simultaneous Aberth iteration, used when the QR iteration stalls.
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let r = 1.0 + c[..n].iter().fold(0.0f64, |a, x| a.max((x / c[n]).abs()));
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(r * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / n as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner_c(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Newton refinement of a simple root.
pub(crate) fn polish(c: &[f64], mut z: Complex64) -> Complex64 {
    let (mut p, mut dp) = horner_c(c, z);
    for _ in 0..8 {
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let (pn, dpn) = horner_c(c, next);
        // near a multiple root the step is rounding noise
        if !(pn.norm() < p.norm()) {
            break;
        }
        let done = (next - z).norm() <= 1e-17 * z.norm().max(1.0);
        (z, p, dp) = (next, pn, dpn);
        if done {
            break;
        }
    }
    z
}

/// Best rational approximation with bounded denominator via continued fractions.
pub(crate) fn rationalize(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}
