//! Straight-line `f64` programs compiled from expressions.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::{EvalError, Expr, Node};

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Add(Vec<usize>),
    Mul(Vec<usize>),
    PowI(usize, i32),
    Sqrt(usize),
    PowF(usize, f64),
}

/// Several expressions compiled over a fixed variable order, sharing common
/// subexpressions.
#[derive(Debug, Clone)]
pub struct Tape {
    vars: Vec<String>,
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn compile(exprs: &[Expr], vars: &[&str]) -> Result<Tape, EvalError> {
        let mut t = Tape { vars: vars.iter().map(|s| s.to_string()).collect(), ops: Vec::new(), outputs: Vec::new() };
        let mut seen: HashMap<Expr, usize> = HashMap::new();
        for e in exprs {
            let slot = t.emit(e, &mut seen)?;
            t.outputs.push(slot);
        }
        Ok(t)
    }

    fn emit(&mut self, e: &Expr, seen: &mut HashMap<Expr, usize>) -> Result<usize, EvalError> {
        if let Some(&i) = seen.get(e) {
            return Ok(i);
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(c.to_f64().unwrap_or(f64::NAN)),
            Node::Var(v) => Op::Var(
                self.vars.iter().position(|x| x == &**v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
            ),
            Node::Add(ts) => Op::Add(ts.iter().map(|t| self.emit(t, seen)).collect::<Result<_, _>>()?),
            Node::Mul(ts) => Op::Mul(ts.iter().map(|t| self.emit(t, seen)).collect::<Result<_, _>>()?),
            Node::Pow(b, x) => {
                let i = self.emit(b, seen)?;
                if x.is_integer() {
                    Op::PowI(i, x.to_integer().to_i32().ok_or(EvalError::DomainError)?)
                } else if *x == super::rat(1, 2) {
                    Op::Sqrt(i)
                } else {
                    Op::PowF(i, x.to_f64().unwrap_or(f64::NAN))
                }
            }
        };
        self.ops.push(op);
        let slot = self.ops.len() - 1;
        seen.insert(e.clone(), slot);
        Ok(slot)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut buf = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(i) => x[*i],
                Op::Add(ts) => ts.iter().map(|&i| buf[i]).sum(),
                Op::Mul(ts) => ts.iter().map(|&i| buf[i]).product(),
                Op::PowI(i, n) => {
                    let b: f64 = buf[*i];
                    if b == 0.0 && *n < 0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    b.powi(*n)
                }
                Op::Sqrt(i) => {
                    let b: f64 = buf[*i];
                    if b < 0.0 {
                        return Err(EvalError::DomainError);
                    }
                    b.sqrt()
                }
                Op::PowF(i, p) => {
                    let b: f64 = buf[*i];
                    if b < 0.0 {
                        return Err(EvalError::DomainError);
                    }
                    if b == 0.0 && *p < 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    b.powf(*p)
                }
            };
            buf.push(v);
        }
        Ok(self.outputs.iter().map(|&i| buf[i]).collect())
    }
}
