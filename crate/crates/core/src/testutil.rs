//! Random expression generators shared by the property tests.

use proptest::prelude::*;

use crate::expr::Expr;

/// Exponent vectors of total degree at most `deg` in `n` variables.
pub fn monomials(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|m: Vec<u32>| {
                let used: u32 = m.iter().sum();
                (0..=deg - used).map(move |k| {
                    let mut m = m.clone();
                    m.push(k);
                    m
                })
            })
            .collect();
    }
    out
}

pub fn monomial(vars: &[&str], exps: &[u32]) -> Expr {
    Expr::mul_all(vars.iter().zip(exps).map(|(v, &k)| Expr::var(v).powi(k as i64)))
}

/// Sparse polynomial with small rational coefficients.
pub fn poly(vars: &'static [&'static str], deg: u32, max_terms: usize) -> impl Strategy<Value = Expr> {
    let monos = monomials(vars.len(), deg);
    let n = monos.len();
    prop::collection::vec((0..n, -9i64..=9, 1i64..=4), 0..=max_terms).prop_map(move |terms| {
        Expr::add_all(terms.into_iter().map(|(i, a, b)| Expr::rational(a, b) * monomial(vars, &monos[i])))
    })
}

/// Rational functions built from `vars` with integer exponents.
pub fn rational_function(vars: &'static [&'static str]) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vars).prop_map(Expr::var),
        (-5i64..=5, 1i64..=3).prop_map(|(a, b)| Expr::rational(a, b)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (b.powi(2) + Expr::one())),
            (inner, 0i64..=3).prop_map(|(a, k)| a.powi(k)),
        ]
    })
}
