use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive};

use super::{Expr, Node};

/// Upper bounds on the total degrees of numerator and denominator of a
/// rational function, after bringing it over a common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeBound {
    pub num: u64,
    pub den: u64,
}

impl Expr {
    /// `None` when the expression contains radicals.
    pub fn degree_bound(&self) -> Option<DegreeBound> {
        let mut memo = HashMap::new();
        degree_rec(self, &mut memo)
    }
}

fn degree_rec(e: &Expr, memo: &mut HashMap<usize, Option<DegreeBound>>) -> Option<DegreeBound> {
    if let Some(d) = memo.get(&e.ptr()) {
        return *d;
    }
    let d = match e.node() {
        Node::Const(_) => Some(DegreeBound { num: 0, den: 0 }),
        Node::Var(_) => Some(DegreeBound { num: 1, den: 0 }),
        Node::Add(ts) => {
            let parts: Option<Vec<DegreeBound>> = ts.iter().map(|t| degree_rec(t, memo)).collect();
            parts.map(|ps| {
                let den: u64 = ps.iter().map(|p| p.den).sum();
                let num = ps.iter().map(|p| p.num + den - p.den).max().unwrap_or(0);
                DegreeBound { num, den }
            })
        }
        Node::Mul(fs) => {
            let parts: Option<Vec<DegreeBound>> = fs.iter().map(|t| degree_rec(t, memo)).collect();
            parts.map(|ps| DegreeBound {
                num: ps.iter().map(|p| p.num).sum(),
                den: ps.iter().map(|p| p.den).sum(),
            })
        }
        Node::Pow(b, x) => {
            if !x.is_integer() {
                None
            } else {
                let k = x.to_integer().abs().to_u64()?;
                degree_rec(b, memo).map(|p| {
                    if x.is_negative() {
                        DegreeBound { num: k * p.den, den: k * p.num }
                    } else {
                        DegreeBound { num: k * p.num, den: k * p.den }
                    }
                })
            }
        }
    };
    memo.insert(e.ptr(), d);
    d
}

#[cfg(test)]
mod tests {
    use super::super::{c, v};
    use super::*;

    #[test]
    fn degrees_of_rational_functions() {
        let e = v("x").powi(3) / (v("x") * v("y") + c(1)) + v("y");
        assert_eq!(e.degree_bound(), Some(DegreeBound { num: 3, den: 2 }));
        assert_eq!(v("x").sqrt().degree_bound(), None);
    }
}
