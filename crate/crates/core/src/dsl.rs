//! The `.pg` problem format.
//!
//! ```text
//! # flat geometry
//! scalar_ode flat { vars t z p; F = 0; }
//! pair_ode sphere { vars x y p Y P; F1 = (Y^2+1)^2/(Y*x+P-y); F2 = ...; }
//! cr_graph s3 { vars x y p; F = (x^2+y^2)/4; }
//! coframe fs { vars a b c d; eta1 = da; eta2 = a*db; eta3 = dc; eta4 = dd; }
//! task run { command = verify_chains; system = flat; samples = 20; }
//! ```

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::expr::Expr;
use crate::jet::{CrGraph, PairOde, ScalarOde};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    SyntaxError { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("{line}:{col}: unknown variable `{name}` in `{decl}`")]
    UnknownVariable { name: String, decl: String, line: usize, col: usize },
    #[error("{line}:{col}: duplicate name `{name}`")]
    DuplicateName { name: String, line: usize, col: usize },
}

/// `Σ coeff · d var`, keyed by the differential's variable.
pub type OneFormTerms = Vec<(String, Expr)>;

#[derive(Debug, Clone, PartialEq)]
pub struct CoframeDecl {
    pub vars: Vec<String>,
    pub eta: [OneFormTerms; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskValue {
    Ident(String),
    Number(BigRational),
    Expr(Expr),
}

impl TaskValue {
    pub fn as_ident(&self) -> Option<&str> {
        match self {
            TaskValue::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match self {
            TaskValue::Number(x) => Some(x),
            _ => None,
        }
    }

    /// The value as an expression; identifiers become variables.
    pub fn to_expr(&self) -> Expr {
        match self {
            TaskValue::Ident(s) => Expr::var(s),
            TaskValue::Number(x) => Expr::constant(x.clone()),
            TaskValue::Expr(e) => e.clone(),
        }
    }
}

impl fmt::Display for TaskValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskValue::Ident(s) => f.write_str(s),
            TaskValue::Number(x) => write!(f, "{}", Expr::constant(x.clone())),
            TaskValue::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskDecl {
    pub entries: Vec<(String, TaskValue)>,
}

impl TaskDecl {
    pub fn get(&self, key: &str) -> Option<&TaskValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeclKind {
    ScalarOde(ScalarOde),
    PairOde(PairOde),
    CrGraph(CrGraph),
    Coframe(CoframeDecl),
    Task(TaskDecl),
}

impl DeclKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            DeclKind::ScalarOde(_) => "scalar_ode",
            DeclKind::PairOde(_) => "pair_ode",
            DeclKind::CrGraph(_) => "cr_graph",
            DeclKind::Coframe(_) => "coframe",
            DeclKind::Task(_) => "task",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub name: String,
    pub kind: DeclKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub decls: Vec<Decl>,
}

impl Document {
    pub fn get(&self, name: &str) -> Option<&DeclKind> {
        self.decls.iter().find(|d| d.name == name).map(|d| &d.kind)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.decls.iter().map(|d| d.name.as_str())
    }

    pub fn push(&mut self, name: &str, kind: DeclKind) {
        self.decls.push(Decl { name: name.to_string(), kind });
    }
}

// ---------- lexer ----------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigRational),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(x) => write!(f, "`{x}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        let (l0, c0) = (line, col);
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut frac_part = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = chars[fs..i].iter().collect();
            }
            col += i - start;
            let digits = format!("{int_part}{frac_part}");
            let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().expect("digits") };
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push(Token { tok: Tok::Number(BigRational::new(num, den)), line: l0, col: c0 });
            continue;
        }
        if "{}();=+-*/^".contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError::SyntaxError {
            line,
            col,
            expected: vec!["a token".into()],
            found: format!("`{ch}`"),
        });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------- parser ----------

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    decl: String,
    vars: Option<Vec<String>>,
}

const KINDS: [&str; 5] = ["scalar_ode", "pair_ode", "cr_graph", "coframe", "task"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::SyntaxError {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("`{c}`")])
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Ident(kw.into()) {
            self.bump();
            Ok(())
        } else {
            self.err(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, t.line, t.col))
            }
            _ => self.err(&["identifier"]),
        }
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let mut doc = Document::default();
        let mut seen = HashSet::new();
        loop {
            let t = self.peek().clone();
            let kind = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(k) if KINDS.contains(&k.as_str()) => k.clone(),
                _ => return self.err(&KINDS.map(|k| format!("`{k}`")).iter().map(|s| s.as_str()).collect::<Vec<_>>()),
            };
            self.bump();
            let (name, line, col) = self.ident()?;
            if !seen.insert(name.clone()) {
                return Err(ParseError::DuplicateName { name, line, col });
            }
            self.decl = name.clone();
            self.sym('{')?;
            let body = match kind.as_str() {
                "scalar_ode" => {
                    let v = self.vars(Some(3))?;
                    let f = self.assignment("F")?;
                    DeclKind::ScalarOde(ScalarOde::new([&v[0], &v[1], &v[2]], f).map_err(|e| self.jet_err(e, line, col))?)
                }
                "pair_ode" => {
                    let v = self.vars(Some(5))?;
                    let f1 = self.assignment("F1")?;
                    let f2 = self.assignment("F2")?;
                    DeclKind::PairOde(
                        PairOde::new([&v[0], &v[1], &v[2], &v[3], &v[4]], f1, f2).map_err(|e| self.jet_err(e, line, col))?,
                    )
                }
                "cr_graph" => {
                    let v = self.vars(Some(3))?;
                    let f = self.assignment("F")?;
                    DeclKind::CrGraph(CrGraph::new([&v[0], &v[1], &v[2]], f).map_err(|e| self.jet_err(e, line, col))?)
                }
                "coframe" => DeclKind::Coframe(self.coframe()?),
                _ => DeclKind::Task(self.task()?),
            };
            self.sym('}')?;
            self.vars = None;
            doc.push(&name, body);
        }
        Ok(doc)
    }

    fn jet_err(&self, e: crate::jet::JetError, line: usize, col: usize) -> ParseError {
        match e {
            crate::jet::JetError::DuplicateChartName(name) => ParseError::DuplicateName { name, line, col },
            crate::jet::JetError::ChartMismatch { var, .. } => {
                ParseError::UnknownVariable { name: var, decl: self.decl.clone(), line, col }
            }
            crate::jet::JetError::ZeroOrder => unreachable!("not produced by constructors"),
        }
    }

    fn vars(&mut self, count: Option<usize>) -> Result<Vec<String>, ParseError> {
        self.keyword("vars")?;
        let mut v: Vec<String> = Vec::new();
        while let Tok::Ident(_) = self.peek().tok {
            let (name, line, col) = self.ident()?;
            if v.contains(&name) {
                return Err(ParseError::DuplicateName { name, line, col });
            }
            v.push(name);
        }
        if count.is_some_and(|n| v.len() != n) || v.is_empty() {
            let want = match count {
                Some(n) => format!("{n} variable names"),
                None => "variable names".into(),
            };
            return self.err(&[&want]);
        }
        self.sym(';')?;
        self.vars = Some(v.clone());
        Ok(v)
    }

    fn assignment(&mut self, key: &str) -> Result<Expr, ParseError> {
        self.keyword(key)?;
        self.sym('=')?;
        let e = self.expr()?;
        self.sym(';')?;
        Ok(e)
    }

    fn coframe(&mut self) -> Result<CoframeDecl, ParseError> {
        let vars = self.vars(None)?;
        let mut eta: [Option<OneFormTerms>; 4] = Default::default();
        for _ in 0..4 {
            let t = self.peek().clone();
            let idx = match &t.tok {
                Tok::Ident(s) if s == "eta" => {
                    self.bump();
                    match self.bump().tok {
                        Tok::Number(n) if n.is_integer() => n.to_integer().to_string(),
                        _ => {
                            self.pos -= 1;
                            return self.err(&["1", "2", "3", "4"]);
                        }
                    }
                }
                Tok::Ident(s) if s.starts_with("eta") => {
                    self.bump();
                    s[3..].to_string()
                }
                _ => return self.err(&["`eta1`..`eta4`"]),
            };
            let k = match idx.as_str() {
                "1" => 0,
                "2" => 1,
                "3" => 2,
                "4" => 3,
                _ => {
                    return Err(ParseError::SyntaxError {
                        line: t.line,
                        col: t.col,
                        expected: vec!["`eta1`..`eta4`".into()],
                        found: format!("`eta{idx}`"),
                    })
                }
            };
            if eta[k].is_some() {
                return Err(ParseError::DuplicateName { name: format!("eta{idx}"), line: t.line, col: t.col });
            }
            self.sym('=')?;
            eta[k] = Some(self.oneform()?);
            self.sym(';')?;
        }
        let eta = eta.map(|e| e.expect("all four set"));
        Ok(CoframeDecl { vars, eta })
    }

    /// Recognizes `dV` or `d V` for a declared `V`, returning `V`.
    fn differential(&mut self) -> Option<String> {
        let vars = self.vars.as_ref()?;
        match (self.peek_at(0).clone(), self.peek_at(1).clone()) {
            (Tok::Ident(d), Tok::Ident(v)) if d == "d" && vars.contains(&v) && !vars.contains(&d) => {
                self.bump();
                self.bump();
                Some(v)
            }
            (Tok::Ident(dv), _) if dv.len() > 1 && dv.starts_with('d') && !vars.contains(&dv) => {
                let v = dv[1..].to_string();
                if vars.contains(&v) {
                    self.bump();
                    Some(v)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn oneform(&mut self) -> Result<OneFormTerms, ParseError> {
        let mut terms: OneFormTerms = Vec::new();
        let mut first = true;
        loop {
            let mut coef = Expr::one();
            if self.is_sym('+') || self.is_sym('-') {
                if self.bump().tok == Tok::Sym('-') {
                    coef = -coef;
                }
            } else if !first {
                break;
            }
            first = false;
            let var = loop {
                if let Some(v) = self.differential() {
                    break v;
                }
                let f = self.unary()?;
                coef = coef * f;
                if self.is_sym('*') {
                    self.bump();
                } else if self.is_sym('/') {
                    self.bump();
                    let den = self.unary()?;
                    coef = coef / den;
                    if !self.is_sym('*') {
                        return self.err(&["`*` followed by a differential"]);
                    }
                    self.bump();
                } else {
                    return self.err(&["`*` followed by a differential"]);
                }
            };
            match terms.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c = &*c + &coef,
                None => terms.push((var, coef)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        Ok(terms)
    }

    fn task(&mut self) -> Result<TaskDecl, ParseError> {
        let mut task = TaskDecl::default();
        while let Tok::Ident(_) = self.peek().tok {
            let (key, line, col) = self.ident()?;
            if task.get(&key).is_some() {
                return Err(ParseError::DuplicateName { name: key, line, col });
            }
            self.sym('=')?;
            let value = match (self.peek_at(0).clone(), self.peek_at(1)) {
                (Tok::Ident(s), Tok::Sym(';')) => {
                    self.bump();
                    TaskValue::Ident(s)
                }
                _ => {
                    let e = self.expr()?;
                    match e.as_const() {
                        Some(x) => TaskValue::Number(x.clone()),
                        None => TaskValue::Expr(e),
                    }
                }
            };
            self.sym(';')?;
            task.entries.push((key, value));
        }
        Ok(task)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                acc = acc + self.term()?;
            } else if self.is_sym('-') {
                self.bump();
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.bump();
                acc = acc * self.unary()?;
            } else if self.is_sym('/') {
                self.bump();
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        if self.is_sym('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        self.bump();
        let t = self.peek().clone();
        // right-associative; a sign is allowed directly after `^`
        let exp = self.unary()?;
        match exp.as_const() {
            Some(k) => Ok(base.pow(k.clone())),
            None => Err(ParseError::SyntaxError {
                line: t.line,
                col: t.col,
                expected: vec!["a rational exponent".into()],
                found: format!("`{exp}`"),
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(x) => {
                self.bump();
                Ok(Expr::constant(x))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "sqrt" && self.peek_at(1) == &Tok::Sym('(') => {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.sym(')')?;
                Ok(e.sqrt())
            }
            Tok::Ident(name) => {
                if let Some(vars) = &self.vars {
                    if !vars.contains(&name) {
                        return Err(ParseError::UnknownVariable {
                            name,
                            decl: self.decl.clone(),
                            line: t.line,
                            col: t.col,
                        });
                    }
                }
                self.bump();
                Ok(Expr::var(&name))
            }
            _ => self.err(&["number", "identifier", "`(`"]),
        }
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, decl: String::new(), vars: None }.document()
}

/// Parses a single expression with no variable restriction.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, decl: String::new(), vars: None };
    let e = p.expr()?;
    match p.peek().tok {
        Tok::Eof => Ok(e),
        _ => p.err(&["end of input"]),
    }
}

// ---------- serializer ----------

fn oneform_text(terms: &OneFormTerms, vars: &[String]) -> String {
    if terms.is_empty() {
        return format!("0*d {}", vars[0]);
    }
    let parts: Vec<String> = terms.iter().map(|(v, c)| format!("({c})*d {v}")).collect();
    parts.join(" + ")
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            let kw = d.kind.keyword();
            writeln!(f, "{kw} {} {{", d.name)?;
            match &d.kind {
                DeclKind::ScalarOde(s) => {
                    writeln!(f, "  vars {};", s.chart.join(" "))?;
                    writeln!(f, "  F = {};", s.f)?;
                }
                DeclKind::PairOde(s) => {
                    writeln!(f, "  vars {};", s.chart.join(" "))?;
                    writeln!(f, "  F1 = {};", s.f[0])?;
                    writeln!(f, "  F2 = {};", s.f[1])?;
                }
                DeclKind::CrGraph(s) => {
                    writeln!(f, "  vars {};", s.chart.join(" "))?;
                    writeln!(f, "  F = {};", s.f)?;
                }
                DeclKind::Coframe(c) => {
                    writeln!(f, "  vars {};", c.vars.join(" "))?;
                    for (i, e) in c.eta.iter().enumerate() {
                        writeln!(f, "  eta{} = {};", i + 1, oneform_text(e, &c.vars))?;
                    }
                }
                DeclKind::Task(t) => {
                    for (k, v) in &t.entries {
                        writeln!(f, "  {k} = {v};")?;
                    }
                }
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

/// Text that parses back to `doc`.
pub fn serialize(doc: &Document) -> String {
    doc.to_string()
}
