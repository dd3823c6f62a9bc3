use std::collections::HashMap;

use num_traits::One;

use super::{Expr, Node};

impl Expr {
    /// Partial derivative with respect to the variable `name`.
    pub fn diff(&self, name: &str) -> Expr {
        let mut memo = HashMap::new();
        diff_rec(self, name, &mut memo)
    }

    /// Repeated partial derivative, applied left to right.
    pub fn diff_many(&self, names: &[&str]) -> Expr {
        names.iter().fold(self.clone(), |e, n| e.diff(n))
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn subst(&self, map: &[(&str, Expr)]) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        let table: HashMap<&str, &Expr> = map.iter().map(|(k, e)| (*k, e)).collect();
        let mask = map.iter().fold(0u64, |m, (k, _)| m | Expr::var(k).mask());
        let mut memo = HashMap::new();
        subst_rec(self, &table, mask, &mut memo)
    }

    /// Renames variables; shorthand for substituting variables by variables.
    pub fn rename(&self, pairs: &[(&str, &str)]) -> Expr {
        let map: Vec<(&str, Expr)> = pairs.iter().map(|(a, b)| (*a, Expr::var(b))).collect();
        self.subst(&map)
    }
}

fn diff_rec(e: &Expr, name: &str, memo: &mut HashMap<usize, Expr>) -> Expr {
    if !e.may_contain(name) {
        return Expr::zero();
    }
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(v) => {
            if &**v == name {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => Expr::add_all(ts.iter().map(|t| diff_rec(t, name, memo))),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = diff_rec(f, name, memo);
                if df.is_zero() {
                    continue;
                }
                let mut prod: Vec<Expr> = Vec::with_capacity(fs.len());
                prod.extend(fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()));
                prod.push(df);
                terms.push(Expr::mul_all(prod));
            }
            Expr::add_all(terms)
        }
        Node::Pow(b, x) => {
            let db = diff_rec(b, name, memo);
            if db.is_zero() {
                Expr::zero()
            } else {
                Expr::mul_all([Expr::constant(x.clone()), b.pow(x - num_rational::BigRational::one()), db])
            }
        }
    };
    memo.insert(e.ptr(), d.clone());
    d
}

fn subst_rec(
    e: &Expr,
    table: &HashMap<&str, &Expr>,
    mask: u64,
    memo: &mut HashMap<usize, Expr>,
) -> Expr {
    if e.mask() & mask == 0 {
        return e.clone();
    }
    if let Some(r) = memo.get(&e.ptr()) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => table.get(&**v).map(|x| (*x).clone()).unwrap_or_else(|| e.clone()),
        Node::Add(ts) => Expr::add_all(ts.iter().map(|t| subst_rec(t, table, mask, memo))),
        Node::Mul(fs) => Expr::mul_all(fs.iter().map(|t| subst_rec(t, table, mask, memo))),
        Node::Pow(b, x) => subst_rec(b, table, mask, memo).pow(x.clone()),
    };
    memo.insert(e.ptr(), r.clone());
    r
}

#[cfg(test)]
mod tests {
    use super::super::{c, rat, v};
    use super::*;

    #[test]
    fn product_and_chain_rules() {
        let x = v("x");
        let y = v("y");
        let e = x.powi(3) * &y + (&x * &y).sqrt();
        let dx = e.diff("x");
        let want = c(3) * x.powi(2) * &y + Expr::rational(1, 2) * (&x * &y).pow(rat(-1, 2)) * &y;
        assert_eq!(dx, want);
        assert!(e.diff("z").is_zero());
    }

    #[test]
    fn quotient_rule() {
        let x = v("x");
        let e = c(1) / (&x + c(1));
        assert_eq!(e.diff("x"), -(&x + c(1)).powi(-2));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = v("x") - v("y");
        let s = e.subst(&[("x", v("y")), ("y", v("x"))]);
        assert_eq!(s, v("y") - v("x"));
        assert!(e.subst(&[("x", v("y"))]).is_zero());
    }
}
