//! Jet-coordinate models of second-order ODEs and CR graphs.

use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("variable `{var}` is not in chart ({chart})")]
    ChartMismatch { var: String, chart: String },
    #[error("chart names must be pairwise distinct: {0}")]
    DuplicateChartName(String),
    #[error("prolongation order must be at least 1")]
    ZeroOrder,
}

fn check_chart(chart: &[String], exprs: &[&Expr]) -> Result<(), JetError> {
    for (i, a) in chart.iter().enumerate() {
        if chart[..i].contains(a) {
            return Err(JetError::DuplicateChartName(a.clone()));
        }
    }
    for e in exprs {
        for v in e.free_vars() {
            if !chart.contains(&v) {
                return Err(JetError::ChartMismatch { var: v, chart: chart.join(",") });
            }
        }
    }
    Ok(())
}

/// `z'' = F(t, z, z')` with chart names `(t, z, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOde {
    pub chart: [String; 3],
    pub f: Expr,
}

impl ScalarOde {
    pub fn new(chart: [&str; 3], f: Expr) -> Result<Self, JetError> {
        let chart = chart.map(String::from);
        check_chart(&chart, &[&f])?;
        Ok(ScalarOde { chart, f })
    }

    /// Default chart `(t, z, p)`.
    pub fn standard(f: Expr) -> Result<Self, JetError> {
        ScalarOde::new(["t", "z", "p"], f)
    }

    pub fn t(&self) -> &str {
        &self.chart[0]
    }
    pub fn z(&self) -> &str {
        &self.chart[1]
    }
    pub fn p(&self) -> &str {
        &self.chart[2]
    }

    /// The same equation written in the chart `names`.
    pub fn renamed(&self, names: [&str; 3]) -> ScalarOde {
        let pairs: Vec<(&str, &str)> = self.chart.iter().map(|s| s.as_str()).zip(names).collect();
        ScalarOde { chart: names.map(String::from), f: self.f.rename(&pairs) }
    }
}

/// `(u^i)'' = F^i(t, u, u')`, i = 1, 2, with chart names `(t, u1, u2, q1, q2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOde {
    pub chart: [String; 5],
    pub f: [Expr; 2],
}

impl PairOde {
    pub fn new(chart: [&str; 5], f1: Expr, f2: Expr) -> Result<Self, JetError> {
        let chart = chart.map(String::from);
        check_chart(&chart, &[&f1, &f2])?;
        Ok(PairOde { chart, f: [f1, f2] })
    }

    /// Default chart `(t, u1, u2, q1, q2)`.
    pub fn standard(f1: Expr, f2: Expr) -> Result<Self, JetError> {
        PairOde::new(["t", "u1", "u2", "q1", "q2"], f1, f2)
    }

    pub fn t(&self) -> &str {
        &self.chart[0]
    }
    pub fn u(&self, i: usize) -> &str {
        &self.chart[1 + i]
    }
    pub fn q(&self, i: usize) -> &str {
        &self.chart[3 + i]
    }

    pub fn chart_refs(&self) -> [&str; 5] {
        [&self.chart[0], &self.chart[1], &self.chart[2], &self.chart[3], &self.chart[4]]
    }

    pub fn renamed(&self, names: [&str; 5]) -> PairOde {
        let pairs: Vec<(&str, &str)> = self.chart.iter().map(|s| s.as_str()).zip(names).collect();
        PairOde { chart: names.map(String::from), f: [self.f[0].rename(&pairs), self.f[1].rename(&pairs)] }
    }

    /// Rewrites an expression given in this pair's chart into `other`'s chart, positionally.
    pub fn to_chart_of(&self, e: &Expr, other: &PairOde) -> Expr {
        let pairs: Vec<(&str, &str)> =
            self.chart.iter().map(|s| s.as_str()).zip(other.chart.iter().map(|s| s.as_str())).collect();
        e.rename(&pairs)
    }

    pub fn check_expr(&self, e: &Expr) -> Result<(), JetError> {
        check_chart(&self.chart, &[e])
    }
}

/// Real hypersurface `q = F(x, y, p)` in C^2, chart names `(x, y, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrGraph {
    pub chart: [String; 3],
    pub f: Expr,
}

impl CrGraph {
    pub fn new(chart: [&str; 3], f: Expr) -> Result<Self, JetError> {
        let chart = chart.map(String::from);
        check_chart(&chart, &[&f])?;
        Ok(CrGraph { chart, f })
    }

    pub fn standard(f: Expr) -> Result<Self, JetError> {
        CrGraph::new(["x", "y", "p"], f)
    }
}

/// `y''' = F(x, y, y', y'')` with chart names `(x, y, y1, y2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderOde {
    pub chart: [String; 4],
    pub f: Expr,
}

impl ThirdOrderOde {
    pub fn new(chart: [&str; 4], f: Expr) -> Result<Self, JetError> {
        let chart = chart.map(String::from);
        check_chart(&chart, &[&f])?;
        Ok(ThirdOrderOde { chart, f })
    }
}

/// `D = ∂t + q^i ∂_{u^i} + F^i ∂_{q^i}` applied to `e`.
pub fn total_derivative(e: &Expr, sys: &PairOde) -> Result<Expr, JetError> {
    sys.check_expr(e)?;
    Ok(total_derivative_unchecked(e, sys))
}

pub(crate) fn total_derivative_unchecked(e: &Expr, sys: &PairOde) -> Expr {
    let mut terms = vec![e.diff(sys.t())];
    for i in 0..2 {
        terms.push(Expr::var(sys.q(i)) * e.diff(sys.u(i)));
        terms.push(&sys.f[i] * e.diff(sys.q(i)));
    }
    Expr::add_all(terms)
}

/// `D = ∂t + p ∂z + F ∂p` applied to `e`.
pub fn total_derivative_scalar(e: &Expr, sys: &ScalarOde) -> Result<Expr, JetError> {
    check_chart(&sys.chart, &[e])?;
    Ok(total_derivative_scalar_unchecked(e, sys))
}

pub(crate) fn total_derivative_scalar_unchecked(e: &Expr, sys: &ScalarOde) -> Expr {
    e.diff(sys.t()) + Expr::var(sys.p()) * e.diff(sys.z()) + &sys.f * e.diff(sys.p())
}

/// Iterated total derivative.
pub fn prolong(sys: &PairOde, e: &Expr, order: usize) -> Result<Expr, JetError> {
    if order == 0 {
        return Err(JetError::ZeroOrder);
    }
    sys.check_expr(e)?;
    let mut out = e.clone();
    for _ in 0..order {
        out = total_derivative_unchecked(&out, sys);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, v, ZeroTest};

    fn generic() -> PairOde {
        PairOde::standard(v("u1") * v("q2") + v("t"), v("q1").powi(2) - v("u2")).unwrap()
    }

    #[test]
    fn derivative_of_coordinates() {
        let s = generic();
        assert_eq!(total_derivative(&v("u1"), &s).unwrap(), v("q1"));
        assert_eq!(total_derivative(&v("q1"), &s).unwrap(), s.f[0]);
        let d = total_derivative(&(v("u1") * v("q2")), &s).unwrap();
        assert!(ZeroTest::default().check_equal(&d, &(v("q1") * v("q2") + v("u1") * &s.f[1])).unwrap().is_zero());
    }

    #[test]
    fn scalar_derivative() {
        let flat = ScalarOde::standard(c(0)).unwrap();
        assert_eq!(total_derivative_scalar(&v("z"), &flat).unwrap(), v("p"));
        let sq = ScalarOde::standard(v("p").powi(2)).unwrap();
        assert_eq!(total_derivative_scalar(&v("p"), &sq).unwrap(), v("p").powi(2));
        let d = total_derivative_scalar(&(v("t") * v("p")), &sq).unwrap();
        assert_eq!(d, v("p") + v("t") * v("p").powi(2));
    }

    #[test]
    fn prolongation() {
        let s = generic();
        assert_eq!(prolong(&s, &v("u1"), 2).unwrap(), s.f[0]);
        assert_eq!(prolong(&s, &v("q2"), 1).unwrap(), s.f[1]);
        assert_eq!(prolong(&s, &v("u1"), 0), Err(JetError::ZeroOrder));
    }

    #[test]
    fn chart_is_enforced() {
        assert!(matches!(ScalarOde::standard(v("q")), Err(JetError::ChartMismatch { .. })));
        assert!(matches!(total_derivative(&v("w"), &generic()), Err(JetError::ChartMismatch { .. })));
        assert!(matches!(PairOde::new(["t", "t", "a", "b", "c"], c(0), c(0)), Err(JetError::DuplicateChartName(_))));
    }
}

#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::*;
    use crate::expr::ZeroTest;
    use crate::testutil::poly;

    const CHART: &[&str] = &["t", "u1", "u2", "q1", "q2"];

    fn zero(e: Expr) -> bool {
        ZeroTest::new(3, 20).check(&e).unwrap().is_zero()
    }

    fn system() -> impl Strategy<Value = PairOde> {
        (poly(CHART, 2, 4), poly(CHART, 2, 4)).prop_map(|(f1, f2)| PairOde::standard(f1, f2).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn total_derivative_is_a_derivation(sys in system(), a in poly(CHART, 3, 5), b in poly(CHART, 3, 5), k in -4i64..=4) {
            let d = |e: &Expr| total_derivative(e, &sys).unwrap();
            prop_assert!(zero(d(&(&a + Expr::int(k) * &b)) - d(&a) - Expr::int(k) * d(&b)));
            prop_assert!(zero(d(&(&a * &b)) - d(&a) * &b - &a * d(&b)));
        }

        #[test]
        fn prolongation_composes(sys in system(), e in poly(CHART, 2, 4), a in 1usize..=2, b in 1usize..=2) {
            let whole = prolong(&sys, &e, a + b).unwrap();
            let split = prolong(&sys, &prolong(&sys, &e, a).unwrap(), b).unwrap();
            prop_assert!(zero(whole - split));
        }
    }
}
