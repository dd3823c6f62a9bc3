use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

use super::*;
use crate::expr::{int, rat};

/// A root of a factored binary quartic.
#[derive(Debug, Clone)]
enum Factor {
    Real(BigRational),
    Infinity,
    Pair(BigRational, BigRational),
}

type Coeffs = Vec<BigRational>;

fn mul(a: &[BigRational], b: &[BigRational]) -> Coeffs {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `x^k y^(n-k)` for `k = 0..=n`.
fn factor_coeffs(f: &Factor) -> Coeffs {
    match f {
        Factor::Real(r) => vec![-r.clone(), int(1)],
        Factor::Infinity => vec![int(1), int(0)],
        Factor::Pair(a, b) => vec![a * a + b * b, -(a * int(2)), int(1)],
    }
}

fn expand(factors: &[(Factor, usize)]) -> Coeffs {
    let mut c = vec![int(1)];
    for (f, m) in factors {
        for _ in 0..*m {
            c = mul(&c, &factor_coeffs(f));
        }
    }
    c
}

fn to_w(c: &[BigRational]) -> [BigRational; 5] {
    [c[4].clone(), &c[3] / int(4), &c[2] / int(6), &c[1] / int(4), c[0].clone()]
}

fn value() -> impl Strategy<Value = BigRational> {
    (-6i64..=6).prop_map(|n| rat(n, 2))
}

fn partition(n: usize) -> BoxedStrategy<Vec<usize>> {
    match n {
        0 => Just(vec![]).boxed(),
        2 => prop_oneof![Just(vec![1, 1]), Just(vec![2])].boxed(),
        _ => prop_oneof![Just(vec![1, 1, 1, 1]), Just(vec![2, 1, 1]), Just(vec![2, 2]), Just(vec![3, 1]), Just(vec![4])]
            .boxed(),
    }
}

/// Random factorizations with well-separated roots.
fn factored() -> impl Strategy<Value = Vec<(Factor, usize)>> {
    (0usize..=2, any::<bool>(), any::<bool>())
        .prop_flat_map(|(pairs, double_pair, infinity)| {
            let parts = partition(4 - 2 * pairs);
            // roots on a half-integer grid in [-4, 4], kept apart
            let reals = prop::collection::btree_set(-8i64..=8, 4).prop_map(|s| s.into_iter().collect::<Vec<_>>());
            let cplx = prop::collection::vec((value(), (1i64..=4, 2i64..=2)), 2);
            (Just((pairs, double_pair, infinity)), parts, reals, cplx)
        })
        .prop_map(|((pairs, double_pair, infinity), parts, reals, cplx)| {
            let mut out = Vec::new();
            for (i, m) in parts.iter().enumerate() {
                let f = if infinity && i == 0 { Factor::Infinity } else { Factor::Real(rat(reals[i], 2)) };
                out.push((f, *m));
            }
            let pair = |k: usize| Factor::Pair(cplx[k].0.clone(), rat(cplx[k].1 .0, cplx[k].1 .1));
            match (pairs, double_pair) {
                (1, _) => out.push((pair(0), 1)),
                (2, true) => out.push((pair(0), 2)),
                (2, false) => {
                    let (a, b) = (pair(0), pair(1));
                    // keep the two pairs apart
                    let b = match (&a, b) {
                        (Factor::Pair(re, im), Factor::Pair(re2, im2)) if re == &re2 && im == &im2 => {
                            Factor::Pair(re2 + int(1), im2)
                        }
                        (_, b) => b,
                    };
                    out.push((a, 1));
                    out.push((b, 1));
                }
                _ => {}
            }
            out
        })
}

fn expected(factors: &[(Factor, usize)]) -> Vec<(RootKind, usize)> {
    let mut roots: Vec<Root> = factors
        .iter()
        .map(|(f, m)| {
            let kind = match f {
                Factor::Real(r) => RootKind::Real(RootPoint::Finite(r.to_f64().unwrap())),
                Factor::Infinity => RootKind::Real(RootPoint::Infinity),
                Factor::Pair(a, b) => RootKind::ComplexPair { re: a.to_f64().unwrap(), im: b.to_f64().unwrap() },
            };
            Root { kind, multiplicity: *m, exact: None }
        })
        .collect();
    sort_roots(&mut roots);
    roots.into_iter().map(|r| (r.kind, r.multiplicity)).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)
}

fn same_roots(p: &RootProfile, want: &[(RootKind, usize)]) -> Result<(), TestCaseError> {
    prop_assert_eq!(p.roots.len(), want.len(), "{} vs {:?}", p, want);
    let mut used = vec![false; want.len()];
    for r in &p.roots {
        let hit = want.iter().enumerate().position(|(i, (k, m))| {
            !used[i]
                && r.multiplicity == *m
                && match (&r.kind, k) {
                    (RootKind::Real(RootPoint::Finite(x)), RootKind::Real(RootPoint::Finite(y))) => close(*x, *y),
                    (RootKind::Real(RootPoint::Infinity), RootKind::Real(RootPoint::Infinity)) => true,
                    (RootKind::ComplexPair { re, im }, RootKind::ComplexPair { re: re2, im: im2 }) => {
                        close(*re, *re2) && close(*im, *im2)
                    }
                    _ => false,
                }
        });
        match hit {
            Some(i) => used[i] = true,
            None => prop_assert!(false, "{} vs {:?}", p, want),
        }
    }
    Ok(())
}

fn pattern(p: &RootProfile) -> Vec<(bool, usize)> {
    let mut v: Vec<(bool, usize)> = p.roots.iter().map(|r| (r.is_real(), r.multiplicity)).collect();
    v.sort();
    v
}

/// `W(a x + b y, c x + d y)` in the `x^k y^(4-k)` basis.
fn transform(c: &[BigRational], m: [[i64; 2]; 2]) -> Coeffs {
    let xf = vec![int(m[0][1]), int(m[0][0])];
    let yf = vec![int(m[1][1]), int(m[1][0])];
    let mut out = vec![BigRational::zero(); 5];
    for (k, ck) in c.iter().enumerate() {
        let mut term = vec![ck.clone()];
        for _ in 0..k {
            term = mul(&term, &xf);
        }
        for _ in k..4 {
            term = mul(&term, &yf);
        }
        for (i, t) in term.into_iter().enumerate() {
            out[i] += t;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factored_quartics_round_trip(f in factored()) {
        let c = expand(&f);
        let want = expected(&f);
        let w = to_w(&c);
        same_roots(&classify_quartic_exact(&w), &want)?;
        let wf = w.clone().map(|x| x.to_f64().unwrap());
        same_roots(&classify_quartic(&wf, DEFAULT_TOL).unwrap(), &want)?;
    }

    #[test]
    fn scaling_is_invisible(f in factored(), num in -7i64..=7, den in 1i64..=5) {
        prop_assume!(num != 0);
        let w = to_w(&expand(&f));
        let lam = rat(num, den);
        let scaled = w.clone().map(|x| x * &lam);
        prop_assert_eq!(classify_quartic_exact(&scaled), classify_quartic_exact(&w));
        let a = classify_quartic(&w.clone().map(|x| x.to_f64().unwrap()), DEFAULT_TOL).unwrap();
        let b = classify_quartic(&scaled.map(|x| x.to_f64().unwrap()), DEFAULT_TOL).unwrap();
        same_roots(&b, &a.roots.iter().map(|r| (r.kind.clone(), r.multiplicity)).collect::<Vec<_>>())?;
    }

    #[test]
    fn gl2_preserves_the_pattern(f in factored(), m in prop::array::uniform4(-3i64..=3)) {
        let m = [[m[0], m[1]], [m[2], m[3]]];
        prop_assume!(m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0);
        let c = expand(&f);
        let before = classify_quartic_exact(&to_w(&c));
        let after = classify_quartic_exact(&to_w(&transform(&c, m)));
        prop_assert_eq!(pattern(&before), pattern(&after));
        // real roots move by the inverse Möbius map
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
        let inv = [[m[1][1] as f64 / det, -m[0][1] as f64 / det], [-m[1][0] as f64 / det, m[0][0] as f64 / det]];
        for r in before.roots.iter().filter(|r| r.is_real()) {
            let (x, y) = match r.kind {
                RootKind::Real(RootPoint::Finite(x)) => (x, 1.0),
                _ => (1.0, 0.0),
            };
            let (u, v) = (inv[0][0] * x + inv[0][1] * y, inv[1][0] * x + inv[1][1] * y);
            let hit = after.roots.iter().any(|s| s.multiplicity == r.multiplicity && match s.kind {
                RootKind::Real(RootPoint::Finite(z)) => (u - z * v).abs() <= 1e-9 * u.abs().max(v.abs()),
                RootKind::Real(RootPoint::Infinity) => v.abs() <= 1e-9 * u.abs(),
                _ => false,
            });
            prop_assert!(hit, "{} -> {}", before, after);
        }
    }
}
