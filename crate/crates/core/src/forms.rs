//! Differential forms with expression coefficients over a fixed chart.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assignment, EvalError, Expr, IdentityError, Verdict, ZeroTest};
use crate::jet::{PairOde, ScalarOde};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("chart mismatch: ({0}) vs ({1})")]
    ChartMismatch(String, String),
    #[error("`{0}` is not a chart variable")]
    UnknownVariable(String),
    #[error("expected a {expected}-form, got a {got}-form")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("kernel has dimension {corank}, expected 1")]
    RankDeficient { corank: usize },
    #[error("generators are pointwise dependent")]
    DependentGenerators,
    #[error("characteristic field is not of the form ∂x + Y∂y + P∂p + …")]
    NotTotalDerivative,
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A k-form `Σ c_I dx^I` over strictly increasing multi-indices `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    chart: Vec<String>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

/// Sorts `idx` in place, returning the permutation sign, or `None` on a repeat.
fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl Form {
    pub fn zero(chart: &[&str], degree: usize) -> Form {
        Form { chart: chart.iter().map(|s| s.to_string()).collect(), degree, terms: BTreeMap::new() }
    }

    pub fn function(chart: &[&str], f: Expr) -> Form {
        let mut out = Form::zero(chart, 0);
        out.insert(vec![], f);
        out
    }

    /// The coordinate differential `d name`.
    pub fn dvar(chart: &[&str], name: &str) -> Result<Form, FormError> {
        Form::one_form(chart, &[(name, Expr::one())])
    }

    pub fn one_form(chart: &[&str], terms: &[(&str, Expr)]) -> Result<Form, FormError> {
        let mut out = Form::zero(chart, 1);
        for (name, c) in terms {
            let i = out.index_of(name)?;
            out.insert(vec![i], c.clone());
        }
        Ok(out)
    }

    /// Builds from unsorted index tuples; antisymmetry is applied on insertion.
    pub fn from_terms(chart: &[&str], degree: usize, terms: Vec<(Vec<&str>, Expr)>) -> Result<Form, FormError> {
        let mut out = Form::zero(chart, degree);
        for (names, c) in terms {
            if names.len() != degree {
                return Err(FormError::DegreeMismatch { expected: degree, got: names.len() });
            }
            let idx = names.iter().map(|n| out.index_of(n)).collect::<Result<Vec<_>, _>>()?;
            out.insert(idx, c);
        }
        Ok(out)
    }

    fn insert(&mut self, mut idx: Vec<usize>, c: Expr) {
        let Some(sign) = sort_sign(&mut idx) else { return };
        let c = if sign < 0 { -c } else { c };
        let entry = self.terms.remove(&idx).map(|old| old + &c).unwrap_or(c);
        if !entry.is_zero() {
            self.terms.insert(idx, entry);
        }
    }

    pub fn index_of(&self, name: &str) -> Result<usize, FormError> {
        self.chart.iter().position(|c| c == name).ok_or_else(|| FormError::UnknownVariable(name.to_string()))
    }

    pub fn chart(&self) -> &[String] {
        &self.chart
    }

    pub fn chart_refs(&self) -> Vec<&str> {
        self.chart.iter().map(|s| s.as_str()).collect()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Expr> {
        self.terms.values()
    }

    /// Coefficient of `dx^{i1} ∧ … ∧ dx^{ik}` with the sign of the given order.
    pub fn coeff(&self, names: &[&str]) -> Result<Expr, FormError> {
        let mut idx = names.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>, _>>()?;
        let Some(sign) = sort_sign(&mut idx) else { return Ok(Expr::zero()) };
        let c = self.terms.get(&idx).cloned().unwrap_or_else(Expr::zero);
        Ok(if sign < 0 { -c } else { c })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_chart(&self, o: &Form) -> Result<(), FormError> {
        if self.chart != o.chart {
            return Err(FormError::ChartMismatch(self.chart.join(","), o.chart.join(",")));
        }
        Ok(())
    }

    pub fn add(&self, o: &Form) -> Result<Form, FormError> {
        self.same_chart(o)?;
        if self.degree != o.degree && !o.is_zero() && !self.is_zero() {
            return Err(FormError::DegreeMismatch { expected: self.degree, got: o.degree });
        }
        let mut out = if self.is_zero() { Form { terms: BTreeMap::new(), ..o.clone() } } else { self.clone() };
        for (k, v) in &o.terms {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Form) -> Result<Form, FormError> {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, f: &Expr) -> Form {
        let mut out = Form { terms: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.terms {
            out.insert(k.clone(), v * f);
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let mut out = Form { terms: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.terms {
            out.insert(k.clone(), f(v));
        }
        out
    }

    /// Antisymmetric coefficient matrix of a 2-form.
    pub fn matrix(&self) -> Result<Vec<Vec<Expr>>, FormError> {
        if self.degree != 2 {
            return Err(FormError::DegreeMismatch { expected: 2, got: self.degree });
        }
        let n = self.chart.len();
        let mut m = vec![vec![Expr::zero(); n]; n];
        for (k, v) in &self.terms {
            m[k[0]][k[1]] = v.clone();
            m[k[1]][k[0]] = -v;
        }
        Ok(m)
    }

    /// Probabilistic test that every coefficient vanishes.
    pub fn vanishes(&self, test: &ZeroTest) -> Result<Verdict, FormError> {
        Ok(test.check_all(self.terms.values())?)
    }

    /// Pullback along `old_i = map[i](new)`.
    pub fn pullback(&self, new_chart: &[&str], map: &[Expr]) -> Result<Form, FormError> {
        if map.len() != self.chart.len() {
            return Err(FormError::ChartMismatch(self.chart.join(","), format!("{} components", map.len())));
        }
        let subs: Vec<(&str, Expr)> = self.chart.iter().map(|s| s.as_str()).zip(map.iter().cloned()).collect();
        let dmap: Vec<Form> = map
            .iter()
            .map(|m| {
                let mut f = Form::zero(new_chart, 1);
                for (j, v) in new_chart.iter().enumerate() {
                    f.insert(vec![j], m.diff(v));
                }
                f
            })
            .collect();
        let mut out = Form::zero(new_chart, self.degree);
        for (idx, c) in &self.terms {
            let mut acc = Form::function(new_chart, c.subst(&subs));
            for &i in idx {
                acc = wedge(&acc, &dmap[i])?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// Restriction to the slice `var = value`.
    pub fn restrict(&self, var: &str, value: Expr) -> Result<Form, FormError> {
        let new: Vec<&str> = self.chart.iter().map(|s| s.as_str()).filter(|s| *s != var).collect();
        if new.len() == self.chart.len() {
            return Err(FormError::UnknownVariable(var.to_string()));
        }
        let map: Vec<Expr> =
            self.chart.iter().map(|s| if s == var { value.clone() } else { Expr::var(s) }).collect();
        self.pullback(&new, &map)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                let d: Vec<String> = k.iter().map(|&i| format!("d{}", self.chart[i])).collect();
                if d.is_empty() {
                    format!("{v}")
                } else {
                    format!("({v})*{}", d.join("^"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form, FormError> {
    a.same_chart(b)?;
    let mut out = Form { chart: a.chart.clone(), degree: a.degree + b.degree, terms: BTreeMap::new() };
    for (ka, va) in &a.terms {
        for (kb, vb) in &b.terms {
            let idx: Vec<usize> = ka.iter().chain(kb.iter()).copied().collect();
            out.insert(idx, va * vb);
        }
    }
    Ok(out)
}

pub fn exterior_derivative(a: &Form) -> Form {
    let mut out = Form { chart: a.chart.clone(), degree: a.degree + 1, terms: BTreeMap::new() };
    for (k, v) in &a.terms {
        for (i, name) in a.chart.iter().enumerate() {
            let dv = v.diff(name);
            if dv.is_zero() {
                continue;
            }
            let mut idx = Vec::with_capacity(k.len() + 1);
            idx.push(i);
            idx.extend_from_slice(k);
            out.insert(idx, dv);
        }
    }
    out
}

/// `v ⌟ a` for a vector field with components `v[i]` along `∂/∂chart[i]`.
pub fn interior_product(v: &[Expr], a: &Form) -> Result<Form, FormError> {
    if v.len() != a.chart.len() {
        return Err(FormError::ChartMismatch(a.chart.join(","), format!("{} components", v.len())));
    }
    if a.degree == 0 {
        return Err(FormError::DegreeMismatch { expected: 1, got: 0 });
    }
    let mut out = Form { chart: a.chart.clone(), degree: a.degree - 1, terms: BTreeMap::new() };
    for (k, c) in &a.terms {
        for (pos, &i) in k.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            let mut rest = k.clone();
            rest.remove(pos);
            let term = &v[i] * c;
            out.insert(rest, if pos % 2 == 1 { -term } else { term });
        }
    }
    Ok(out)
}

/// A form with complex coefficients `re + i im`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexForm {
    pub re: Form,
    pub im: Form,
}

impl ComplexForm {
    pub fn new(re: Form, im: Form) -> Result<ComplexForm, FormError> {
        re.same_chart(&im)?;
        Ok(ComplexForm { re, im })
    }

    pub fn wedge(&self, o: &ComplexForm) -> Result<ComplexForm, FormError> {
        let re = wedge(&self.re, &o.re)?.sub(&wedge(&self.im, &o.im)?)?;
        let im = wedge(&self.re, &o.im)?.add(&wedge(&self.im, &o.re)?)?;
        Ok(ComplexForm { re, im })
    }

    pub fn d(&self) -> ComplexForm {
        ComplexForm { re: exterior_derivative(&self.re), im: exterior_derivative(&self.im) }
    }

    pub fn vanishes(&self, test: &ZeroTest) -> Result<Verdict, FormError> {
        Ok(test.check_all(self.re.coefficients().chain(self.im.coefficients()))?)
    }
}

// ---------- the chain 2-form ----------

pub const RHO_CHART: [&str; 5] = ["x", "y", "p", "b1", "b2"];
pub const CHAIN_CHART: [&str; 5] = ["x", "y", "p", "Y", "P"];

/// The quasi-symplectic 2-form on chart `(x, y, p, b1, b2)`.
pub fn rho_chain(sys: &ScalarOde) -> Form {
    let f = sys.renamed(["x", "y", "p"]).f;
    let (p, b1, b2) = (Expr::var("p"), Expr::var("b1"), Expr::var("b2"));
    let fp = f.diff("p");
    let fpp = fp.diff("p");
    let fppp = fpp.diff("p");
    let fy = f.diff("y");
    let sixth = Expr::rational(1, 6);
    let terms: Vec<(Vec<&str>, Expr)> = vec![
        (vec!["p", "b1"], Expr::int(-1)),
        (vec!["p", "y"], -(&sixth * &fppp)),
        (vec!["x", "p"], &b2 * &b1 + Expr::rational(1, 2) * &fpp + &b1 * &fp - &sixth * &p * &fppp),
        (vec!["x", "b2"], &b1 * &p + Expr::one()),
        (vec!["x", "b1"], &p * &b2 + &f),
        (
            vec!["x", "y"],
            Expr::add_all([
                -(&sixth * f.diff_many(&["x", "p", "p"])),
                Expr::rational(2, 3) * fy.diff("p"),
                &b1 * &fy,
                -(&sixth * &p * fy.diff("p").diff("p")),
            ]),
        ),
        (vec!["y", "b2"], -&b1),
        (vec!["y", "b1"], -&b2),
    ];
    Form::from_terms(&RHO_CHART, 2, terms).expect("fixed chart")
}

/// Exact or floating kernel vector at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFieldValue {
    pub chart: Vec<String>,
    pub components: Vec<f64>,
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

fn rational_kernel(mut m: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = m[r][c].clone();
        for j in 0..cols {
            m[r][j] = &m[r][j] / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::from_integer(1.into());
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

/// Kernel of a 2-form's matrix at a point, normalized so the first nonzero
/// component is 1. Rational coefficients are handled exactly, radicals by SVD.
pub fn characteristic_direction(a: &Form, point: &Assignment) -> Result<VectorFieldValue, FormError> {
    let m = a.matrix()?;
    let n = m.len();
    let env = point.env();
    let radical = m.iter().flatten().any(Expr::has_radicals);
    if !radical {
        let mr: Vec<Vec<BigRational>> =
            m.iter().map(|r| r.iter().map(|e| e.eval_exact(&env)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
        let ker = rational_kernel(mr);
        if ker.len() != 1 {
            return Err(FormError::RankDeficient { corank: ker.len() });
        }
        let mut v = ker.into_iter().next().expect("one vector");
        let lead = v.iter().find(|x| !x.is_zero()).cloned().expect("nonzero kernel vector");
        for x in v.iter_mut() {
            *x = &*x / &lead;
        }
        return Ok(VectorFieldValue {
            chart: a.chart.clone(),
            components: v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
            exact: Some(v),
        });
    }
    let env = point.env_f64();
    let mut mf = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mf[(i, j)] = m[i][j].eval_f64(&env)?;
        }
    }
    let svd = mf.svd(false, true);
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let small: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= 1e-10 * smax).collect();
    if small.len() != 1 {
        return Err(FormError::RankDeficient { corank: small.len() });
    }
    let vt = svd.v_t.expect("requested");
    let mut v: Vec<f64> = (0..n).map(|j| vt[(small[0], j)]).collect();
    let lead = v.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
    for x in v.iter_mut() {
        *x /= lead;
    }
    Ok(VectorFieldValue { chart: a.chart.clone(), components: v, exact: None })
}

/// Kernel of a square expression matrix of corank one by fraction-free
/// elimination; pivots are the smallest entries that test nonzero.
pub fn symbolic_kernel(mut a: Vec<Vec<Expr>>, test: &ZeroTest) -> Result<Vec<Expr>, FormError> {
    let n = a.len();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut prev = Expr::one();
    let mut rank = 0;
    for k in 0..n {
        let mut cand: Vec<(usize, usize, usize)> = Vec::new();
        for i in k..n {
            for j in k..n {
                if !a[i][j].is_zero() {
                    cand.push((a[i][j].size(), i, j));
                }
            }
        }
        cand.sort();
        let mut pivot = None;
        for (_, i, j) in cand {
            if !test.check(&a[i][j])?.is_zero() {
                pivot = Some((i, j));
                break;
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        cols.swap(k, pj);
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
            }
            a[i][k] = Expr::zero();
        }
        prev = a[k][k].clone();
        rank += 1;
    }
    if rank + 1 != n {
        return Err(FormError::RankDeficient { corank: n - rank });
    }
    let mut x = vec![Expr::zero(); n];
    x[n - 1] = Expr::one();
    for i in (0..n - 1).rev() {
        let s: Expr = (i + 1..n).map(|j| &a[i][j] * &x[j]).sum();
        x[i] = -s / &a[i][i];
    }
    let mut out = vec![Expr::zero(); n];
    for (k, &c) in cols.iter().enumerate() {
        out[c] = x[k].clone();
    }
    Ok(out)
}

/// ρ in the chart `(x, y, p, Y, P)` with `b1 = 1/(Y-p)`, `b2 = (F-P)/(Y-p)`.
pub fn rho_in_chain_chart(sys: &ScalarOde) -> Result<Form, FormError> {
    let f = sys.renamed(["x", "y", "p"]).f;
    let delta = Expr::var("Y") - Expr::var("p");
    let map = [
        Expr::var("x"),
        Expr::var("y"),
        Expr::var("p"),
        delta.recip(),
        (f - Expr::var("P")) / &delta,
    ];
    rho_chain(sys).pullback(&CHAIN_CHART, &map)
}

/// Derives the chain pair from the kernel of ρ.
pub fn chain_pair_via_rho(sys: &ScalarOde, test: &ZeroTest) -> Result<PairOde, FormError> {
    let rho = rho_in_chain_chart(sys)?;
    let test = test.clone().nonzero(Expr::var("Y") - Expr::var("p"));
    let k = symbolic_kernel(rho.matrix()?, &test)?;
    let norm: Vec<Expr> = k.iter().map(|e| e / &k[0]).collect();
    for (i, want) in [(1, "Y"), (2, "P")] {
        if !test.check(&(&norm[i] - Expr::var(want)))?.is_zero() {
            return Err(FormError::NotTotalDerivative);
        }
    }
    Ok(PairOde::new(CHAIN_CHART, norm[3].clone(), norm[4].clone()).expect("chain chart"))
}

// ---------- integrability ----------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusVerdict {
    pub integrable: bool,
    /// Index of the first generator whose derivative leaves the ideal.
    pub failing_generator: Option<usize>,
    pub witness: Option<Assignment>,
}

fn frobenius_generic<T: Clone>(
    gens: &[T],
    wedge: impl Fn(&T, &T) -> Result<T, FormError>,
    d: impl Fn(&T) -> T,
    vanishes: impl Fn(&T) -> Result<Verdict, FormError>,
) -> Result<FrobeniusVerdict, FormError> {
    let Some(first) = gens.first() else {
        return Ok(FrobeniusVerdict { integrable: true, failing_generator: None, witness: None });
    };
    let mut top = first.clone();
    for g in &gens[1..] {
        top = wedge(&top, g)?;
    }
    if vanishes(&top)?.is_zero() {
        return Err(FormError::DependentGenerators);
    }
    for (i, g) in gens.iter().enumerate() {
        let w = wedge(&d(g), &top)?;
        if let Verdict::Nonzero { witness, .. } = vanishes(&w)? {
            return Ok(FrobeniusVerdict { integrable: false, failing_generator: Some(i), witness: Some(witness) });
        }
    }
    Ok(FrobeniusVerdict { integrable: true, failing_generator: None, witness: None })
}

/// `dθ ∧ θ1 ∧ … ∧ θk ≡ 0` for every generator `θ`.
pub fn frobenius_integrable(generators: &[Form], test: &ZeroTest) -> Result<FrobeniusVerdict, FormError> {
    frobenius_generic(generators, wedge, exterior_derivative, |f| f.vanishes(test))
}

pub fn frobenius_integrable_complex(
    generators: &[ComplexForm],
    test: &ZeroTest,
) -> Result<FrobeniusVerdict, FormError> {
    frobenius_generic(generators, |a, b| a.wedge(b), |a| a.d(), |f| f.vanishes(test))
}

/// Whether a rational 2-form's matrix has the given rank at a point.
pub fn rank_at(a: &Form, point: &Assignment) -> Result<usize, FormError> {
    let m = a.matrix()?;
    let env = point.env();
    let mr: Vec<Vec<BigRational>> =
        m.iter().map(|r| r.iter().map(|e| e.eval_exact(&env)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    Ok(m.len() - rational_kernel(mr).len())
}
