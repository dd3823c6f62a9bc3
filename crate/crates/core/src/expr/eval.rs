//! Evaluation in exact rationals, `f64`, and 256-bit binary floats.

use std::collections::HashMap;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{exact_root, Expr, Node};

/// Working precision, in bits, of [`Big`].
pub const BIG_PRECISION: usize = 256;

pub type Big = FBig<HalfEven, 2>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative base under a fractional exponent")]
    DomainError,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("value is not rational")]
    NotExact,
}

/// Scalar types an expression can be evaluated in.
pub(crate) trait Num: Clone {
    fn from_rat(r: &BigRational) -> Self;
    fn n_add(&self, o: &Self) -> Self;
    fn n_mul(&self, o: &Self) -> Self;
    fn n_abs(&self) -> Self;
    fn n_is_zero(&self) -> bool;
    fn n_is_negative(&self) -> bool;
    fn n_powi(&self, n: i64) -> Result<Self, EvalError>;
    /// Principal real `d`-th root of a non-negative value.
    fn n_root(&self, d: u32) -> Result<Self, EvalError>;

    fn n_pow(&self, e: &BigRational) -> Result<Self, EvalError> {
        if e.is_integer() {
            let n = e.to_integer().to_i64().ok_or(EvalError::DomainError)?;
            return self.n_powi(n);
        }
        if self.n_is_negative() {
            return Err(EvalError::DomainError);
        }
        let n = e.numer().to_i64().ok_or(EvalError::DomainError)?;
        let d = e.denom().to_u32().ok_or(EvalError::DomainError)?;
        if self.n_is_zero() {
            return if n < 0 { Err(EvalError::DivisionByZero) } else { Ok(self.clone()) };
        }
        self.n_root(d)?.n_powi(n)
    }
}

impl Num for BigRational {
    fn from_rat(r: &BigRational) -> Self {
        r.clone()
    }
    fn n_add(&self, o: &Self) -> Self {
        self + o
    }
    fn n_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn n_abs(&self) -> Self {
        Signed::abs(self)
    }
    fn n_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn n_is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn n_powi(&self, n: i64) -> Result<Self, EvalError> {
        if Zero::is_zero(self) && n < 0 {
            return Err(EvalError::DivisionByZero);
        }
        let n32 = i32::try_from(n).map_err(|_| EvalError::DomainError)?;
        Ok(num_traits::pow::Pow::pow(self, n32))
    }
    fn n_root(&self, d: u32) -> Result<Self, EvalError> {
        let n = exact_root(self.numer(), d).ok_or(EvalError::NotExact)?;
        let m = exact_root(self.denom(), d).ok_or(EvalError::NotExact)?;
        Ok(BigRational::new(n, m))
    }
}

impl Num for f64 {
    fn from_rat(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn n_add(&self, o: &Self) -> Self {
        self + o
    }
    fn n_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn n_abs(&self) -> Self {
        f64::abs(*self)
    }
    fn n_is_zero(&self) -> bool {
        *self == 0.0
    }
    fn n_is_negative(&self) -> bool {
        *self < 0.0
    }
    fn n_powi(&self, n: i64) -> Result<Self, EvalError> {
        if *self == 0.0 && n < 0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(match i32::try_from(n) {
            Ok(k) => f64::powi(*self, k),
            Err(_) => f64::powf(*self, n as f64),
        })
    }
    fn n_root(&self, d: u32) -> Result<Self, EvalError> {
        Ok(if d == 2 { self.sqrt() } else { self.powf(1.0 / d as f64) })
    }
}

pub(crate) fn bigint_to_ibig(n: &BigInt) -> IBig {
    let (sign, bytes) = n.to_bytes_le();
    let mag = IBig::from(dashu_int::UBig::from_le_bytes(&bytes));
    if sign == num_bigint::Sign::Minus {
        -mag
    } else {
        mag
    }
}

pub(crate) fn big_from_rat(r: &BigRational) -> Big {
    let n = Big::from(bigint_to_ibig(r.numer())).with_precision(BIG_PRECISION).value();
    let d = Big::from(bigint_to_ibig(r.denom())).with_precision(BIG_PRECISION).value();
    &n / &d
}

pub(crate) fn big_to_f64(x: &Big) -> f64 {
    x.to_f64().value()
}

impl Num for Big {
    fn from_rat(r: &BigRational) -> Self {
        big_from_rat(r)
    }
    fn n_add(&self, o: &Self) -> Self {
        self + o
    }
    fn n_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn n_abs(&self) -> Self {
        if self.sign() == dashu_int::Sign::Negative {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn n_is_zero(&self) -> bool {
        *self.repr().significand() == IBig::ZERO
    }
    fn n_is_negative(&self) -> bool {
        self.sign() == dashu_int::Sign::Negative && !self.n_is_zero()
    }
    fn n_powi(&self, n: i64) -> Result<Self, EvalError> {
        if self.n_is_zero() && n < 0 {
            return Err(EvalError::DivisionByZero);
        }
        if n < 0 {
            let one = Big::ONE.with_precision(BIG_PRECISION).value();
            Ok(&one / &self.powi(IBig::from(-n)))
        } else {
            Ok(self.powi(IBig::from(n)))
        }
    }
    fn n_root(&self, d: u32) -> Result<Self, EvalError> {
        Ok(if d == 2 { self.sqrt() } else { self.nth_root(d as usize) })
    }
}

/// Evaluates `e`, returning the value and a magnitude scale.
///
/// The scale bounds the size of the intermediate terms that were summed;
/// `|value| <= tol * scale` is used as a relative zero test.
pub(crate) fn eval_scaled<T: Num>(
    e: &Expr,
    env: &dyn Fn(&str) -> Option<T>,
) -> Result<(T, T), EvalError> {
    let mut memo: HashMap<usize, (T, T)> = HashMap::new();
    eval_rec(e, env, true, &mut memo)
}

pub(crate) fn eval_plain<T: Num>(e: &Expr, env: &dyn Fn(&str) -> Option<T>) -> Result<T, EvalError> {
    let mut memo: HashMap<usize, (T, T)> = HashMap::new();
    eval_rec(e, env, false, &mut memo).map(|r| r.0)
}

fn eval_rec<T: Num>(
    e: &Expr,
    env: &dyn Fn(&str) -> Option<T>,
    track: bool,
    memo: &mut HashMap<usize, (T, T)>,
) -> Result<(T, T), EvalError> {
    if let Some(r) = memo.get(&e.ptr()) {
        return Ok(r.clone());
    }
    let r = match e.node() {
        Node::Const(c) => {
            let x = T::from_rat(c);
            let s = if track { x.n_abs() } else { x.clone() };
            (x, s)
        }
        Node::Var(v) => {
            let x = env(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?;
            let s = if track { x.n_abs() } else { x.clone() };
            (x, s)
        }
        Node::Add(ts) => {
            let (mut x, mut s) = eval_rec(&ts[0], env, track, memo)?;
            for t in &ts[1..] {
                let (a, b) = eval_rec(t, env, track, memo)?;
                x = x.n_add(&a);
                if track {
                    s = s.n_add(&b);
                }
            }
            (x, s)
        }
        Node::Mul(fs) => {
            let (mut x, mut s) = eval_rec(&fs[0], env, track, memo)?;
            for f in &fs[1..] {
                let (a, b) = eval_rec(f, env, track, memo)?;
                x = x.n_mul(&a);
                if track {
                    s = s.n_mul(&b);
                }
            }
            (x, s)
        }
        Node::Pow(b, ex) => {
            let (x, s) = eval_rec(b, env, track, memo)?;
            let val = x.n_pow(ex)?;
            let scale = if !track {
                s
            } else if ex.is_negative() {
                val.n_abs()
            } else {
                s.n_pow(ex)?
            };
            (val, scale)
        }
    };
    memo.insert(e.ptr(), r.clone());
    Ok(r)
}

impl Expr {
    /// Exact evaluation. Radicals must have rational values at the point.
    pub fn eval_exact(&self, env: &HashMap<String, BigRational>) -> Result<BigRational, EvalError> {
        eval_plain(self, &|n: &str| env.get(n).cloned())
    }

    pub fn eval_f64(&self, env: &HashMap<String, f64>) -> Result<f64, EvalError> {
        eval_plain(self, &|n: &str| env.get(n).copied())
    }

    /// `f64` evaluation with variables given positionally.
    pub fn eval_at(&self, names: &[&str], values: &[f64]) -> Result<f64, EvalError> {
        eval_plain(self, &|n: &str| names.iter().position(|m| *m == n).map(|i| values[i]))
    }

    /// Evaluation at [`BIG_PRECISION`] bits. Returns value and magnitude scale.
    pub fn eval_big(&self, env: &HashMap<String, BigRational>) -> Result<(Big, Big), EvalError> {
        eval_scaled(self, &|n: &str| env.get(n).map(big_from_rat))
    }
}

/// `(value, scale)` of a big float converted to `f64`, for reporting.
#[cfg(test)]
fn big_pair_f64(p: &(Big, Big)) -> (f64, f64) {
    (big_to_f64(&p.0), big_to_f64(&p.1))
}

#[cfg(test)]
mod tests {
    use super::super::{c, rat, v};
    use super::*;

    fn env(pairs: &[(&str, BigRational)]) -> HashMap<String, BigRational> {
        pairs.iter().map(|(k, x)| (k.to_string(), x.clone())).collect()
    }

    #[test]
    fn exact_values() {
        let e = (v("x") + c(1)) / v("y") + v("x").sqrt();
        let r = e.eval_exact(&env(&[("x", rat(9, 4)), ("y", rat(2, 1))])).unwrap();
        assert_eq!(r, rat(13, 8) + rat(3, 2));
    }

    #[test]
    fn errors_are_reported() {
        let e = c(1) / v("x");
        assert_eq!(e.eval_exact(&env(&[("x", rat(0, 1))])), Err(EvalError::DivisionByZero));
        let s = v("x").sqrt();
        assert_eq!(s.eval_exact(&env(&[("x", rat(-1, 1))])), Err(EvalError::DomainError));
        assert_eq!(s.eval_exact(&env(&[("x", rat(2, 1))])), Err(EvalError::NotExact));
        assert_eq!(s.eval_exact(&env(&[])), Err(EvalError::UnboundVariable("x".into())));
    }

    #[test]
    fn big_float_is_accurate() {
        let e = v("x").sqrt().powi(2) - v("x");
        // sqrt(x)^2 simplifies symbolically; build the unsimplified form by hand
        assert!(e.is_zero());
        let r = v("x").sqrt() * v("y").sqrt() - (v("x") * v("y")).sqrt();
        let (val, scale) = r.eval_big(&env(&[("x", rat(2, 1)), ("y", rat(3, 1))])).unwrap();
        let (val, scale) = big_pair_f64(&(val, scale));
        assert!(val.abs() <= 1e-70 * scale, "{val} {scale}");
    }

    #[test]
    fn f64_positional() {
        let e = v("a") * v("b") - c(1);
        assert_eq!(e.eval_at(&["a", "b"], &[2.0, 3.0]).unwrap(), 5.0);
    }
}
