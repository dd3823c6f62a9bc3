//! Root types of binary quadrics and quartics, and the admissibility
//! predicates built from them.
//!
//! Two paths are provided. Rational coefficients go through a squarefree
//! decomposition over Q, so multiplicities and reality are exact and only
//! irrational root positions are computed numerically. Floating coefficients
//! go through companion-matrix eigenvalues in both affine charts followed by
//! tolerance-based clustering.

mod upoly;
#[cfg(test)]
mod props;

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assignment, EvalError, Expr, Sampler, DEFAULT_BOUND, DEFAULT_RESAMPLES};
use crate::invariants::{CurvatureQuartic, TorsionQuadric};
use upoly::{companion_roots, polish, rationalize, Poly};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Coefficient vectors whose max-norm is below this are the zero form.
pub const ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("root clustering is ambiguous near tolerance {tol:e}")]
    IllConditioned { tol: f64 },
    #[error("no admissible sample point after {0} attempts")]
    SamplingExhausted(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A point of RP^1: `Finite(x)` is `[x:1]`, `Infinity` is `[1:0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RootPoint {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RootKind {
    Real(RootPoint),
    /// Conjugate pair `re ± i im` in the chart `y = 1`, stored with `im > 0`.
    ComplexPair { re: f64, im: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Root {
    pub kind: RootKind,
    pub multiplicity: usize,
    /// Exact value for rational finite real roots.
    #[serde(skip)]
    pub exact: Option<BigRational>,
}

impl Root {
    pub fn is_real(&self) -> bool {
        matches!(self.kind, RootKind::Real(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootProfile {
    pub degree: usize,
    pub zero_form: bool,
    pub roots: Vec<Root>,
}

impl RootProfile {
    fn zero(degree: usize) -> Self {
        RootProfile { degree, zero_form: true, roots: vec![] }
    }

    pub fn distinct_real(&self) -> usize {
        self.roots.iter().filter(|r| r.is_real()).count()
    }

    /// Total multiplicity; a conjugate pair counts twice.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| if r.is_real() { r.multiplicity } else { 2 * r.multiplicity }).sum()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).max().unwrap_or(0)
    }

    pub fn has_repeated(&self) -> bool {
        self.max_multiplicity() > 1
    }

    /// Two distinct real roots, each of multiplicity two.
    pub fn is_d_r(&self) -> bool {
        self.degree == 4
            && !self.zero_form
            && self.roots.len() == 2
            && self.roots.iter().all(|r| r.is_real() && r.multiplicity == 2)
    }

    /// One non-real conjugate pair of multiplicity two.
    pub fn is_d_c(&self) -> bool {
        self.degree == 4 && !self.zero_form && self.roots.len() == 1 && !self.roots[0].is_real()
            && self.roots[0].multiplicity == 2
    }

    /// Quadric with two distinct real roots.
    pub fn two_distinct_real(&self) -> bool {
        !self.zero_form && self.distinct_real() == 2
    }

    /// Multiplicity pattern such as `R2 R2`, `C2`, `R1 R1 C1`, or `0`.
    pub fn type_key(&self) -> String {
        if self.zero_form {
            return "0".into();
        }
        let mut parts: Vec<String> = self
            .roots
            .iter()
            .map(|r| format!("{}{}", if r.is_real() { "R" } else { "C" }, r.multiplicity))
            .collect();
        parts.sort_by(|a, b| b.cmp(a));
        parts.join(" ")
    }
}

impl fmt::Display for RootProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero_form {
            return f.write_str("zero form");
        }
        let parts: Vec<String> = self
            .roots
            .iter()
            .map(|r| match &r.kind {
                RootKind::Real(RootPoint::Finite(x)) => format!("[{x:.6}:1]^{}", r.multiplicity),
                RootKind::Real(RootPoint::Infinity) => format!("[1:0]^{}", r.multiplicity),
                RootKind::ComplexPair { re, im } => format!("({re:.6}±{im:.6}i)^{}", r.multiplicity),
            })
            .collect();
        f.write_str(&parts.join(", "))
    }
}

fn sort_roots(roots: &mut [Root]) {
    let key = |r: &Root| -> (u8, f64, f64) {
        match r.kind {
            RootKind::Real(RootPoint::Finite(x)) => (0, x, 0.0),
            RootKind::Real(RootPoint::Infinity) => (1, 0.0, 0.0),
            RootKind::ComplexPair { re, im } => (2, re, im),
        }
    };
    roots.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0)
            .then(ka.1.partial_cmp(&kb.1).unwrap_or(Ordering::Equal))
            .then(ka.2.partial_cmp(&kb.2).unwrap_or(Ordering::Equal))
    });
}

fn finite_real(x: f64, m: usize, exact: Option<BigRational>) -> Root {
    Root { kind: RootKind::Real(RootPoint::Finite(x)), multiplicity: m, exact }
}

// ---------- exact path ----------

/// Roots of a squarefree rational polynomial of degree >= 1.
fn squarefree_roots(g: &Poly, m: usize, out: &mut Vec<Root>) {
    match g.degree() {
        0 => {}
        1 => {
            let r = -&g.0[0] / &g.0[1];
            out.push(finite_real(r.to_f64().unwrap_or(f64::NAN), m, Some(r)));
        }
        2 => quadratic_roots(g, m, out),
        _ => higher_roots(g, m, out),
    }
}

fn quadratic_roots(g: &Poly, m: usize, out: &mut Vec<Root>) {
    let (c, b, a) = (&g.0[0], &g.0[1], &g.0[2]);
    let disc = b * b - BigRational::from_integer(4.into()) * a * c;
    let two_a = a * BigRational::from_integer(2.into());
    if disc.is_negative() {
        let re = (-b / &two_a).to_f64().unwrap_or(f64::NAN);
        let im = (disc.abs() / (&two_a * &two_a)).to_f64().unwrap_or(f64::NAN).sqrt();
        out.push(Root { kind: RootKind::ComplexPair { re, im }, multiplicity: m, exact: None });
        return;
    }
    if let (Some(sn), Some(sd)) =
        (crate::expr::exact_root(disc.numer(), 2), crate::expr::exact_root(disc.denom(), 2))
    {
        let s = BigRational::new(sn, sd);
        for r in [(-b + &s) / &two_a, (-b - &s) / &two_a] {
            out.push(finite_real(r.to_f64().unwrap_or(f64::NAN), m, Some(r)));
        }
        return;
    }
    // stable formula on the monic normalisation
    let p = (b / a).to_f64().unwrap_or(f64::NAN);
    let q = (c / a).to_f64().unwrap_or(f64::NAN);
    let d = (disc / (a * a)).to_f64().unwrap_or(f64::NAN).sqrt();
    let big = -(p + p.signum() * d) / 2.0;
    let (r1, r2) = if big == 0.0 { (d / 2.0, -d / 2.0) } else { (big, q / big) };
    out.push(finite_real(r1, m, None));
    out.push(finite_real(r2, m, None));
}

fn higher_roots(g: &Poly, m: usize, out: &mut Vec<Root>) {
    let cf = g.to_f64();
    let approx: Vec<Complex64> = companion_roots(&cf).into_iter().map(|z| polish(&cf, z)).collect();
    // rational roots
    for z in &approx {
        if z.im.abs() > 1e-6 * z.norm().max(1.0) {
            continue;
        }
        if let Some(r) = rationalize(z.re, 10_000_000) {
            if g.eval(&r).is_zero() {
                let lin = Poly::new(vec![-r.clone(), BigRational::from_integer(1.into())]);
                let rest = g.div_rem(&lin).0;
                out.push(finite_real(r.to_f64().unwrap_or(z.re), m, Some(r)));
                squarefree_roots(&rest, m, out);
                return;
            }
        }
    }
    // rational quadratic factors of a quartic
    if g.degree() == 4 && approx.len() == 4 {
        for (a, b) in [(0, 1), (0, 2), (0, 3)] {
            let s = approx[a] + approx[b];
            let p = approx[a] * approx[b];
            if s.im.abs() > 1e-6 || p.im.abs() > 1e-6 {
                continue;
            }
            if let (Some(s), Some(p)) = (rationalize(s.re, 10_000_000), rationalize(p.re, 10_000_000)) {
                let h = Poly::new(vec![p, -s, BigRational::from_integer(1.into())]);
                let (q, r) = g.div_rem(&h);
                if r.is_zero() {
                    quadratic_roots(&h, m, out);
                    quadratic_roots(&q, m, out);
                    return;
                }
            }
        }
    }
    let n_real = g.real_root_count();
    let mut zs = approx;
    zs.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(Ordering::Equal));
    for z in &zs[..n_real] {
        out.push(finite_real(z.re, m, None));
    }
    let mut rest: Vec<Complex64> = zs[n_real..].iter().filter(|z| z.im > 0.0).copied().collect();
    let mut neg: Vec<Complex64> = zs[n_real..].iter().filter(|z| z.im <= 0.0).copied().collect();
    rest.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal));
    neg.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal));
    for (z, w) in rest.iter().zip(neg.iter()) {
        let re = (z.re + w.re) / 2.0;
        let im = (z.im - w.im) / 2.0;
        out.push(Root { kind: RootKind::ComplexPair { re, im }, multiplicity: m, exact: None });
    }
}

/// Exact classification of `Σ c[k] x^k y^(n-k)`.
fn classify_exact(c: &[BigRational]) -> RootProfile {
    let n = c.len() - 1;
    let f = Poly::new(c.to_vec());
    if f.is_zero() {
        return RootProfile::zero(n);
    }
    let mut roots = Vec::new();
    let d = f.degree();
    if d < n {
        roots.push(Root { kind: RootKind::Real(RootPoint::Infinity), multiplicity: n - d, exact: None });
    }
    for (g, m) in f.squarefree() {
        squarefree_roots(&g, m, &mut roots);
    }
    sort_roots(&mut roots);
    RootProfile { degree: n, zero_form: false, roots }
}

fn quartic_poly<T: Clone>(w: &[T; 5], scale: impl Fn(&T, i64) -> T) -> Vec<T> {
    vec![w[4].clone(), scale(&w[3], 4), scale(&w[2], 6), scale(&w[1], 4), w[0].clone()]
}

fn quadric_poly<T: Clone>(a: &[T; 3], scale: impl Fn(&T, i64) -> T) -> Vec<T> {
    vec![a[2].clone(), scale(&a[1], 2), a[0].clone()]
}

/// Exact root profile of `W0 x^4 + 4W1 x^3 y + 6W2 x^2 y^2 + 4W3 x y^3 + W4 y^4`.
pub fn classify_quartic_exact(w: &[BigRational; 5]) -> RootProfile {
    classify_exact(&quartic_poly(w, |x, k| x * BigRational::from_integer(k.into())))
}

/// Exact root profile of `A0 x^2 + 2A1 x y + A2 y^2`.
pub fn classify_quadric_exact(a: &[BigRational; 3]) -> RootProfile {
    classify_exact(&quadric_poly(a, |x, k| x * BigRational::from_integer(k.into())))
}

// ---------- numeric path ----------

/// Projective complex point kept in whichever chart has the smaller coordinate.
#[derive(Debug, Clone, Copy)]
enum PPoint {
    /// `[x : 1]` with |x| <= 1
    A(Complex64),
    /// `[1 : w]` with |w| < 1
    B(Complex64),
}

impl PPoint {
    fn coords(&self) -> (Complex64, Complex64) {
        match *self {
            PPoint::A(x) => (x, Complex64::new(1.0, 0.0)),
            PPoint::B(w) => (Complex64::new(1.0, 0.0), w),
        }
    }

    fn chordal(&self, o: &PPoint) -> f64 {
        let (a, b) = self.coords();
        let (c, d) = o.coords();
        let num = (a * d - b * c).norm();
        let den = (a.norm_sqr() + b.norm_sqr()).sqrt() * (c.norm_sqr() + d.norm_sqr()).sqrt();
        num / den
    }
}

fn numeric_points(c: &[f64]) -> Vec<PPoint> {
    let n = c.len() - 1;
    let strip = |v: &[f64]| -> Vec<f64> {
        let mut v = v.to_vec();
        while v.last().is_some_and(|x| *x == 0.0) {
            v.pop();
        }
        v
    };
    let ca = strip(c);
    let rev: Vec<f64> = c.iter().rev().copied().collect();
    let cb = strip(&rev);
    let mut a: Vec<Complex64> = companion_roots(&ca).into_iter().map(|z| polish(&ca, z)).collect();
    let mut b: Vec<Complex64> = companion_roots(&cb).into_iter().map(|z| polish(&cb, z)).collect();
    let inf = Complex64::new(f64::INFINITY, 0.0);
    while a.len() < n {
        a.push(inf);
    }
    while b.len() < n {
        b.push(inf);
    }
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for x in a {
        if x.norm() <= 1.0 {
            out.push(PPoint::A(x));
            continue;
        }
        // counterpart in the other chart: w ≈ 1/x
        let target = if x.is_finite() { Complex64::new(1.0, 0.0) / x } else { Complex64::new(0.0, 0.0) };
        let best = (0..n)
            .filter(|&j| !used[j] && b[j].is_finite())
            .min_by(|&i, &j| (b[i] - target).norm().partial_cmp(&(b[j] - target).norm()).unwrap_or(Ordering::Equal));
        match best {
            Some(j) => {
                used[j] = true;
                out.push(PPoint::B(b[j]));
            }
            None => out.push(PPoint::B(target)),
        }
    }
    out
}

/// Greedy clustering, largest clusters first: `k` points form a cluster when
/// their chordal diameter is at most `tol^(1/k)`.
fn cluster(points: &[PPoint], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut free: Vec<usize> = (0..n).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: while !free.is_empty() {
        for k in (2..=free.len()).rev() {
            let mut best: Option<(f64, Vec<usize>)> = None;
            for subset in subsets(&free, k) {
                let diam = subset
                    .iter()
                    .flat_map(|&i| subset.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| points[i].chordal(&points[j]))
                    .fold(0.0f64, f64::max);
                if best.as_ref().is_none_or(|(d, _)| diam < *d) {
                    best = Some((diam, subset));
                }
            }
            if let Some((diam, subset)) = best {
                if diam <= tol.powf(1.0 / k as f64) {
                    free.retain(|i| !subset.contains(i));
                    groups.push(subset);
                    continue 'outer;
                }
            }
        }
        groups.extend(free.drain(..).map(|i| vec![i]));
    }
    groups.sort();
    groups
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = subsets(&items[1..], k - 1);
    for s in out.iter_mut() {
        s.insert(0, items[0]);
    }
    out.extend(subsets(&items[1..], k));
    out
}

/// Moves the mean of an `m`-fold cluster onto the simple root of the
/// `(m-1)`-th derivative nearby.
fn refine_multiple(c: &[f64], z: Complex64, m: usize, radius: f64) -> Complex64 {
    let mut d: Vec<f64> = c.to_vec();
    while d.last().is_some_and(|x| *x == 0.0) {
        d.pop();
    }
    for _ in 1..m {
        d = d.iter().enumerate().skip(1).map(|(k, x)| x * k as f64).collect();
    }
    if d.len() < 2 {
        return z;
    }
    let r = polish(&d, z);

    if r.is_finite() && (r - z).norm() <= radius * z.norm().max(1.0) {
        r
    } else {
        z
    }
}

fn profile_from_clusters(
    points: &[PPoint],
    groups: &[Vec<usize>],
    charts: (&[f64], &[f64]),
    tol: f64,
    n: usize,
) -> Option<RootProfile> {
    let mut roots = Vec::new();
    let mut upper: Vec<(Complex64, usize)> = Vec::new();
    let mut lower: Vec<(Complex64, usize)> = Vec::new();
    for g in groups {
        let m = g.len();
        // average in the chart of the first member
        let mean = match points[g[0]] {
            PPoint::A(_) => {
                let s: Complex64 = g.iter().map(|&i| { let (x, y) = points[i].coords(); x / y }).sum();
                PPoint::A(s / m as f64)
            }
            PPoint::B(_) => {
                let s: Complex64 = g.iter().map(|&i| { let (x, y) = points[i].coords(); y / x }).sum();
                PPoint::B(s / m as f64)
            }
        };
        let radius = tol.powf(1.0 / m as f64);
        let (z, in_b) = match mean {
            PPoint::A(x) if m > 1 => (refine_multiple(charts.0, x, m, radius), false),
            PPoint::B(w) if m > 1 => (refine_multiple(charts.1, w, m, radius), true),
            PPoint::A(x) => (x, false),
            PPoint::B(w) => (w, true),
        };
        if z.im.abs() <= radius {
            let point = if in_b {
                if z.re.abs() <= radius { RootPoint::Infinity } else { RootPoint::Finite(1.0 / z.re) }
            } else {
                RootPoint::Finite(z.re)
            };
            roots.push(Root { kind: RootKind::Real(point), multiplicity: m, exact: None });
        } else {
            let x = if in_b { Complex64::new(1.0, 0.0) / z } else { z };
            if x.im > 0.0 {
                upper.push((x, m));
            } else {
                lower.push((x, m));
            }
        }
    }
    if upper.len() != lower.len() {
        return None;
    }
    for (x, m) in upper {
        let k = lower.iter().position(|(y, mm)| *mm == m && (x - y.conj()).norm() <= tol.powf(1.0 / m as f64) * x.norm().max(1.0) * 10.0)?;
        let (y, _) = lower.remove(k);
        let re = (x.re + y.re) / 2.0;
        let im = (x.im - y.im) / 2.0;
        roots.push(Root { kind: RootKind::ComplexPair { re, im }, multiplicity: m, exact: None });
    }
    sort_roots(&mut roots);
    Some(RootProfile { degree: n, zero_form: false, roots })
}

fn classify_numeric(c: &[f64], tol: f64) -> Result<RootProfile, ClassifyError> {
    let n = c.len() - 1;
    let m = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m < ZERO_FLOOR || !m.is_finite() {
        return Ok(RootProfile::zero(n));
    }
    let mut cn: Vec<f64> = c.iter().map(|x| x / m).collect();
    // root at infinity when the leading coefficient is negligible
    for k in (1..=n).rev() {
        if cn[k].abs() < tol {
            cn[k] = 0.0;
        } else {
            break;
        }
    }
    let points = numeric_points(&cn);
    let rev: Vec<f64> = cn.iter().rev().copied().collect();
    let at = |t: f64| profile_from_clusters(&points, &cluster(&points, t), (&cn, &rev), t, n);
    let main = at(tol).ok_or(ClassifyError::IllConditioned { tol })?;
    for t in [tol / 10.0, tol * 10.0] {
        match at(t) {
            Some(p) if p.type_key() == main.type_key() => {}
            _ => return Err(ClassifyError::IllConditioned { tol }),
        }
    }
    Ok(main)
}

pub fn classify_quartic(w: &[f64; 5], tol: f64) -> Result<RootProfile, ClassifyError> {
    classify_numeric(&quartic_poly(w, |x, k| x * k as f64), tol)
}

pub fn classify_quadric(a: &[f64; 3], tol: f64) -> Result<RootProfile, ClassifyError> {
    classify_numeric(&quadric_poly(a, |x, k| x * k as f64), tol)
}

// ---------- admissibility ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct Admissibility {
    pub chain_2d_path: bool,
    pub chain_cr: bool,
    pub dancing: bool,
    pub freestyling: bool,
}

impl Admissibility {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.chain_2d_path {
            v.push("chain_2Dpath");
        }
        if self.chain_cr {
            v.push("chain_CR");
        }
        if self.dancing {
            v.push("dancing");
        }
        if self.freestyling {
            v.push("freestyling");
        }
        v
    }
}

pub fn admissibility(quartic: &RootProfile, quadric: &RootProfile) -> Admissibility {
    let quadric_ok = quadric.zero_form || quadric.two_distinct_real();
    let two_real = !quartic.zero_form && quartic.distinct_real() >= 2;
    Admissibility {
        chain_2d_path: quartic.is_d_r(),
        chain_cr: quartic.is_d_c(),
        dancing: quadric_ok && two_real && !quartic.has_repeated(),
        freestyling: quadric_ok && two_real && quartic.max_multiplicity() <= 2,
    }
}

// ---------- expression-valued forms ----------

/// Profiles of the torsion quadric and curvature quartic at one point.
#[derive(Debug, Clone, Serialize)]
pub struct PointType {
    pub point: Assignment,
    pub quadric: RootProfile,
    pub quartic: RootProfile,
    pub flags: Admissibility,
}

/// Evaluates and classifies both forms at `point`: exactly when the
/// coefficients are rational functions, otherwise in 256-bit floats.
pub fn classify_at(
    quadric: &TorsionQuadric,
    quartic: &CurvatureQuartic,
    point: &Assignment,
    tol: f64,
) -> Result<PointType, ClassifyError> {
    let env = point.env();
    let radical = quadric.a.iter().chain(quartic.w.iter()).any(Expr::has_radicals);
    let (qd, qt) = if !radical {
        let a: Vec<BigRational> = quadric.a.iter().map(|e| e.eval_exact(&env)).collect::<Result<_, _>>()?;
        let w: Vec<BigRational> = quartic.w.iter().map(|e| e.eval_exact(&env)).collect::<Result<_, _>>()?;
        (
            classify_quadric_exact(&[a[0].clone(), a[1].clone(), a[2].clone()]),
            classify_quartic_exact(&[w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone(), w[4].clone()]),
        )
    } else {
        let big = |e: &Expr| -> Result<f64, EvalError> {
            e.eval_big(&env).map(|(x, _)| crate::expr::big_to_f64(&x))
        };
        let a: Vec<f64> = quadric.a.iter().map(big).collect::<Result<_, _>>()?;
        let w: Vec<f64> = quartic.w.iter().map(big).collect::<Result<_, _>>()?;
        (classify_quadric(&[a[0], a[1], a[2]], tol)?, classify_quartic(&[w[0], w[1], w[2], w[3], w[4]], tol)?)
    };
    let flags = admissibility(&qt, &qd);
    Ok(PointType { point: point.clone(), quadric: qd, quartic: qt, flags })
}

/// Result of classifying at several random points.
#[derive(Debug, Clone, Serialize)]
pub struct TypeSurvey {
    pub samples: Vec<PointType>,
}

impl TypeSurvey {
    /// Common quartic and quadric type keys, if every sample agrees.
    pub fn uniform(&self) -> Option<(String, String)> {
        let first = self.samples.first()?;
        let key = (first.quartic.type_key(), first.quadric.type_key());
        self.samples
            .iter()
            .all(|s| s.quartic.type_key() == key.0 && s.quadric.type_key() == key.1)
            .then_some(key)
    }

    /// First sample whose types differ from the first sample.
    pub fn disagreement(&self) -> Option<&PointType> {
        let first = self.samples.first()?;
        self.samples.iter().find(|s| {
            s.quartic.type_key() != first.quartic.type_key() || s.quadric.type_key() != first.quadric.type_key()
        })
    }

    pub fn all(&self, pred: impl Fn(&PointType) -> bool) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(pred)
    }
}

/// Classifies at `samples` random rational points over `vars`, resampling
/// where a coefficient is undefined or a root cluster is ambiguous.
pub fn survey(
    quadric: &TorsionQuadric,
    quartic: &CurvatureQuartic,
    vars: &[&str],
    samples: usize,
    seed: u64,
) -> Result<TypeSurvey, ClassifyError> {
    let mut sampler = Sampler::new(seed, DEFAULT_BOUND);
    let names: std::collections::BTreeSet<String> = vars.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > DEFAULT_RESAMPLES {
                return Err(ClassifyError::SamplingExhausted(DEFAULT_RESAMPLES));
            }
            let point = sampler.point(&names);
            match classify_at(quadric, quartic, &point, DEFAULT_TOL) {
                Ok(t) => {
                    out.push(t);
                    break;
                }
                Err(ClassifyError::Eval(EvalError::UnboundVariable(v))) => {
                    return Err(ClassifyError::Eval(EvalError::UnboundVariable(v)))
                }
                Err(_) => continue,
            }
        }
    }
    Ok(TypeSurvey { samples: out })
}
