//! Probabilistic zero testing at random rational points.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::eval::{big_to_f64, eval_plain, eval_scaled, Big, Num};
use super::{EvalError, Expr};

/// Numerators and denominators are drawn from `[-B, B]` and `[1, B]`.
pub const DEFAULT_BOUND: i64 = 1_000_000;
pub const DEFAULT_RESAMPLES: usize = 100;
/// Relative tolerance for the 256-bit float fallback.
pub const FLOAT_TOLERANCE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvalMode {
    Exact,
    BigFloat,
}

/// A point in variable space, kept sorted by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub values: Vec<(String, BigRational)>,
}

impl Assignment {
    pub fn get(&self, name: &str) -> Option<&BigRational> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, x)| x)
    }

    pub fn env(&self) -> HashMap<String, BigRational> {
        self.values.iter().cloned().collect()
    }

    pub fn env_f64(&self) -> HashMap<String, f64> {
        self.values.iter().map(|(n, x)| (n.clone(), f64::from_rat(x))).collect()
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.values.len()))?;
        for (n, x) in &self.values {
            m.serialize_entry(n, &x.to_string())?;
        }
        m.end()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(n, x)| format!("{n}={x}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    /// No nonzero value was seen. `failure_bound` bounds the probability of
    /// this being wrong when the expression is a rational function.
    Zero { trials: usize, mode: EvalMode, failure_bound: Option<f64> },
    Nonzero { witness: Assignment, value: f64 },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero { .. })
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            Verdict::Nonzero { witness, .. } => Some(witness),
            Verdict::Zero { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("no admissible sample point found after {0} attempts")]
    SamplingExhausted(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Configuration of a probabilistic zero test.
#[derive(Debug, Clone)]
pub struct ZeroTest {
    pub trials: usize,
    pub bound: i64,
    pub seed: u64,
    pub max_resamples: usize,
    nonzero: Vec<Expr>,
    positive: Vec<Expr>,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            trials: 50,
            bound: DEFAULT_BOUND,
            seed: 0,
            max_resamples: DEFAULT_RESAMPLES,
            nonzero: Vec::new(),
            positive: Vec::new(),
        }
    }
}

/// Seeded source of random rationals.
pub struct Sampler {
    rng: ChaCha8Rng,
    bound: i64,
}

impl Sampler {
    pub fn new(seed: u64, bound: i64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), bound }
    }

    pub fn rational(&mut self) -> BigRational {
        let n = self.rng.gen_range(-self.bound..=self.bound);
        let d = self.rng.gen_range(1..=self.bound);
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    pub fn point(&mut self, vars: &BTreeSet<String>) -> Assignment {
        Assignment { values: vars.iter().map(|v| (v.clone(), self.rational())).collect() }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl ZeroTest {
    pub fn new(seed: u64, trials: usize) -> Self {
        ZeroTest { seed, trials, ..Default::default() }
    }

    /// Sample points must make `e` nonzero.
    pub fn nonzero(mut self, e: Expr) -> Self {
        self.nonzero.push(e);
        self
    }

    /// Sample points must make `e` strictly positive.
    pub fn positive(mut self, e: Expr) -> Self {
        self.positive.push(e);
        self
    }

    fn vars_of(&self, e: &Expr) -> BTreeSet<String> {
        let mut vars = e.free_vars();
        for c in self.nonzero.iter().chain(&self.positive) {
            vars.extend(c.free_vars());
        }
        vars
    }

    fn mode_for(&self, e: &Expr) -> EvalMode {
        let radical = e.has_radicals() || self.nonzero.iter().chain(&self.positive).any(|c| c.has_radicals());
        if radical {
            EvalMode::BigFloat
        } else {
            EvalMode::Exact
        }
    }

    fn admissible(&self, env: &HashMap<String, BigRational>, mode: EvalMode) -> bool {
        let lookup = |n: &str| env.get(n).cloned();
        let lookup_big = |n: &str| env.get(n).map(Big::from_rat);
        for c in &self.nonzero {
            let ok = match mode {
                EvalMode::Exact => eval_plain(c, &lookup).map(|x| !x.is_zero()),
                EvalMode::BigFloat => eval_plain(c, &lookup_big).map(|x| !x.n_is_zero()),
            };
            if ok != Ok(true) {
                return false;
            }
        }
        for c in &self.positive {
            let ok = match mode {
                EvalMode::Exact => eval_plain(c, &lookup).map(|x| x.is_positive()),
                EvalMode::BigFloat => {
                    eval_plain(c, &lookup_big).map(|x| !x.n_is_negative() && !x.n_is_zero())
                }
            };
            if ok != Ok(true) {
                return false;
            }
        }
        true
    }

    /// Decides whether `e` vanishes identically on the constrained domain.
    pub fn check(&self, e: &Expr) -> Result<Verdict, IdentityError> {
        if e.is_zero() {
            return Ok(Verdict::Zero { trials: 0, mode: EvalMode::Exact, failure_bound: Some(0.0) });
        }
        let vars = self.vars_of(e);
        let mode = self.mode_for(e);
        let mut sampler = Sampler::new(self.seed, self.bound);
        for _ in 0..self.trials {
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > self.max_resamples {
                    return Err(IdentityError::SamplingExhausted(self.max_resamples));
                }
                let point = sampler.point(&vars);
                let env = point.env();
                if !self.admissible(&env, mode) {
                    continue;
                }
                match mode {
                    EvalMode::Exact => match eval_plain(e, &|n: &str| env.get(n).cloned()) {
                        Ok(x) if x.is_zero() => break,
                        Ok(x) => {
                            return Ok(Verdict::Nonzero { witness: point, value: f64::from_rat(&x) })
                        }
                        Err(EvalError::UnboundVariable(v)) => {
                            return Err(EvalError::UnboundVariable(v).into())
                        }
                        Err(_) => continue,
                    },
                    EvalMode::BigFloat => {
                        match eval_scaled(e, &|n: &str| env.get(n).map(Big::from_rat)) {
                            Ok((x, s)) => {
                                let (x, s) = (big_to_f64(&x), big_to_f64(&s));
                                if x.abs() <= FLOAT_TOLERANCE * s.max(f64::MIN_POSITIVE) {
                                    break;
                                }
                                return Ok(Verdict::Nonzero { witness: point, value: x });
                            }
                            Err(EvalError::UnboundVariable(v)) => {
                                return Err(EvalError::UnboundVariable(v).into())
                            }
                            Err(_) => continue,
                        }
                    }
                }
            }
        }
        let failure_bound = match mode {
            EvalMode::Exact => e.degree_bound().map(|d| {
                let per = d.num as f64 / (2 * self.bound + 1) as f64;
                per.min(1.0).powi(self.trials as i32)
            }),
            EvalMode::BigFloat => None,
        };
        Ok(Verdict::Zero { trials: self.trials, mode, failure_bound })
    }

    pub fn check_equal(&self, a: &Expr, b: &Expr) -> Result<Verdict, IdentityError> {
        self.check(&(a - b))
    }

    /// Zero test of every entry; stops at the first nonzero one.
    pub fn check_all<'a, I: IntoIterator<Item = &'a Expr>>(&self, es: I) -> Result<Verdict, IdentityError> {
        let mut last = Verdict::Zero { trials: 0, mode: EvalMode::Exact, failure_bound: Some(0.0) };
        for e in es {
            let v = self.check(e)?;
            if !v.is_zero() {
                return Ok(v);
            }
            last = v;
        }
        Ok(last)
    }
}

impl Expr {
    pub fn is_zero_probabilistic(&self, test: &ZeroTest) -> Result<Verdict, IdentityError> {
        test.check(self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{c, v};
    use super::*;

    #[test]
    fn detects_hidden_zero() {
        let (x, y) = (v("x"), v("y"));
        let e = (&x + &y).powi(2) - x.powi(2) - c(2) * &x * &y - y.powi(2);
        assert!(!e.is_zero());
        let verdict = ZeroTest::default().check(&e).unwrap();
        match verdict {
            Verdict::Zero { mode, failure_bound, .. } => {
                assert_eq!(mode, EvalMode::Exact);
                assert!(failure_bound.unwrap() < 1e-100);
            }
            _ => panic!("expected zero"),
        }
    }

    #[test]
    fn finds_witness() {
        let e = v("x").powi(2) - v("x");
        let verdict = ZeroTest::default().check(&e).unwrap();
        let w = verdict.witness().unwrap().clone();
        assert!(!e.eval_exact(&w.env()).unwrap().is_zero());
    }

    #[test]
    fn radical_identities_use_big_floats() {
        let e = v("x").sqrt() * v("y").sqrt() - (v("x") * v("y")).sqrt();
        let t = ZeroTest::default().positive(v("x")).positive(v("y"));
        assert!(matches!(t.check(&e).unwrap(), Verdict::Zero { mode: EvalMode::BigFloat, .. }));
        let bad = v("x").sqrt() + v("x").sqrt() - v("x");
        assert!(!t.check(&bad).unwrap().is_zero());
    }

    #[test]
    fn rational_function_identity_with_poles() {
        let (x, y) = (v("x"), v("y"));
        let e = c(1) / (&x - &y) - c(1) / (&y - &x) - c(2) / (&x - &y);
        assert!(ZeroTest::new(3, 20).nonzero(&x - &y).check(&e).unwrap().is_zero());
    }

    #[test]
    fn exhausted_sampling_is_an_error() {
        let t = ZeroTest::new(0, 5).positive(-v("x").powi(2));
        assert_eq!(t.check(&v("x")), Err(IdentityError::SamplingExhausted(DEFAULT_RESAMPLES)));
    }
}
