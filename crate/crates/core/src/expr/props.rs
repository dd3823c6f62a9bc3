use std::collections::HashMap;

use proptest::prelude::*;

use super::{Expr, Verdict, ZeroTest};
use crate::testutil::{poly, rational_function};

const XYZ: &[&str] = &["x", "y", "z"];

fn test() -> ZeroTest {
    ZeroTest::new(7, 20)
}

/// Fourth-order central difference of `e` in `var` at `env`.
fn central_difference(e: &Expr, var: &str, env: &HashMap<String, f64>, h: f64) -> Option<f64> {
    let at = |dx: f64| {
        let mut env = env.clone();
        *env.get_mut(var).unwrap() += dx;
        e.eval_f64(&env).ok()
    };
    Some((-at(2.0 * h)? + 8.0 * at(h)? - 8.0 * at(-h)? + at(-2.0 * h)?) / (12.0 * h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_rule(e in rational_function(XYZ), f in rational_function(XYZ), var in prop::sample::select(XYZ)) {
        let lhs = (&e * &f).diff(var);
        let rhs = e.diff(var) * &f + &e * f.diff(var);
        let verdict = (lhs - rhs).is_zero_probabilistic(&test());
        prop_assert!(matches!(verdict, Ok(Verdict::Zero { .. })), "{e} * {f}: {verdict:?}");
    }

    #[test]
    fn derivative_matches_finite_difference(
        e in rational_function(XYZ),
        var in prop::sample::select(XYZ),
        pt in prop::array::uniform3(-1.5f64..1.5),
    ) {
        let env: HashMap<String, f64> = XYZ.iter().map(|s| s.to_string()).zip(pt).collect();
        // stay away from poles
        for den in e.denominators() {
            let d = den.eval_f64(&env);
            prop_assume!(matches!(d, Ok(d) if d.abs() > 0.2));
        }
        let exact = e.diff(var).eval_f64(&env).unwrap();
        let fd = central_difference(&e, var, &env, 1e-3).unwrap();
        prop_assume!(exact.abs() < 1e6);
        prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1e-3), "{e}: exact {exact}, fd {fd}");
    }

    #[test]
    fn nonzero_polynomials_get_witnesses(p in poly(XYZ, 3, 6)) {
        prop_assume!(!p.is_zero());
        match p.is_zero_probabilistic(&test()).unwrap() {
            Verdict::Nonzero { witness, .. } => {
                let val = p.eval_exact(&witness.env()).unwrap();
                prop_assert!(val != num_rational::BigRational::from_integer(0.into()));
            }
            v => prop_assert!(false, "{p} declared zero: {v:?}"),
        }
    }

    #[test]
    fn expanded_identities_are_zero(a in poly(XYZ, 2, 4), b in poly(XYZ, 2, 4)) {
        let lhs = (&a + &b).powi(2);
        let rhs = a.powi(2) + Expr::int(2) * &a * &b + b.powi(2);
        match (lhs - rhs).is_zero_probabilistic(&test()).unwrap() {
            Verdict::Zero { failure_bound, .. } => {
                // degree ≤ 4 over a grid of 2·10⁶+1 values, 20 trials
                prop_assert!(failure_bound.unwrap() <= (4.0f64 / 2_000_001.0).powi(20));
            }
            v => prop_assert!(false, "{v:?}"),
        }
    }
}
