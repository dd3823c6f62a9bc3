use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Expr, Node};

// Precedence of a rendered fragment: sum < product (incl. leading minus) < power < atom.
const SUM: u8 = 0;
const PROD: u8 = 1;
const POW: u8 = 2;
const ATOM: u8 = 3;

fn wrap(s: (String, u8), min: u8) -> String {
    if s.1 < min {
        format!("({})", s.0)
    } else {
        s.0
    }
}

fn render_const(c: &BigRational) -> (String, u8) {
    let s = if c.is_integer() { c.numer().to_string() } else { format!("{}/{}", c.numer(), c.denom()) };
    let lvl = if c.is_integer() && !c.is_negative() { ATOM } else { PROD };
    (s, lvl)
}

fn is_negative_term(e: &Expr) -> bool {
    match e.node() {
        Node::Const(c) => c.is_negative(),
        Node::Mul(fs) => fs[0].as_const().is_some_and(|c| c.is_negative()),
        _ => false,
    }
}

fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        Node::Const(c) => render_const(c),
        Node::Var(v) => (v.to_string(), ATOM),
        Node::Add(ts) => {
            let mut s = wrap(render(&ts[0]), SUM);
            for t in &ts[1..] {
                if is_negative_term(t) {
                    s.push_str(" - ");
                    s.push_str(&wrap(render(&-t), PROD));
                } else {
                    s.push_str(" + ");
                    s.push_str(&wrap(render(t), PROD));
                }
            }
            (s, SUM)
        }
        Node::Mul(fs) => {
            let mut coef = BigRational::one();
            let mut num = Vec::new();
            let mut den = Vec::new();
            for f in fs {
                match f.node() {
                    Node::Const(c) => coef = c.clone(),
                    Node::Pow(b, x) if x.is_negative() => den.push(b.pow(-x.clone())),
                    _ => num.push(f.clone()),
                }
            }
            render_product(&coef, &num, &den)
        }
        Node::Pow(b, x) => {
            if x.is_negative() {
                return render_product(&BigRational::one(), &[], &[b.pow(-x.clone())]);
            }
            if *x == super::rat(1, 2) {
                return (format!("sqrt({})", render(b).0), ATOM);
            }
            let base = wrap(render(b), ATOM);
            if x.is_integer() {
                (format!("{base}^{}", x.numer()), POW)
            } else {
                (format!("{base}^({}/{})", x.numer(), x.denom()), POW)
            }
        }
    }
}

fn render_product(coef: &BigRational, num: &[Expr], den: &[Expr]) -> (String, u8) {
    let mut s = String::new();
    if coef.is_negative() {
        s.push('-');
    }
    let n = coef.numer().abs();
    let mut parts = Vec::new();
    if !n.is_one() || num.is_empty() {
        parts.push(n.to_string());
    }
    for f in num {
        parts.push(wrap(render(f), POW));
    }
    s.push_str(&parts.join("*"));
    if !coef.denom().is_one() {
        s.push('/');
        s.push_str(&coef.denom().to_string());
    }
    for d in den {
        s.push('/');
        s.push_str(&wrap(render(d), POW));
    }
    (s, PROD)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{c, rat, v};

    #[test]
    fn renders_readably() {
        let (x, y) = (v("x"), v("y"));
        assert_eq!((c(2) * v("P").powi(2) / (v("p") - v("Y"))).to_string(), "2*P^2/(-Y + p)");
        assert_eq!((&x - &y).to_string(), "x - y");
        assert_eq!((-x.powi(2)).to_string(), "-x^2");
        assert_eq!((x.sqrt() / c(3)).to_string(), "sqrt(x)/3");
        assert_eq!(x.pow(rat(-3, 2)).to_string(), "1/x^(3/2)");
        assert_eq!(c(-2).pow(rat(1, 3)).to_string(), "(-2)^(1/3)");
    }
}
