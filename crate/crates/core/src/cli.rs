//! Verification pipelines behind the `pg` binary and their reports.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebraic_type::{survey, ClassifyError};
use crate::constructions::{
    self, catalog, chain_pair_from_scalar, dancing_curve_numeric, CatalogEntry, ConstructionError, DancingOptions,
    SolutionFunction, CATALOG_NAMES,
};
use crate::dsl::{self, DeclKind, Document, TaskDecl};
use crate::expr::{Expr, Verdict, ZeroTest};
use crate::forms::{
    chain_pair_via_rho, exterior_derivative, frobenius_integrable, frobenius_integrable_complex, rho_chain, wedge,
    ComplexForm, FormError,
};
use crate::invariants::{curvature_quartic, fels_invariants, scalar_invariants, torsion_quadric};
use crate::jet::{CrGraph, PairOde, ScalarOde, ThirdOrderOde};
use crate::numerics::{closedness_check, einstein_check, CoframeMetric, NumericsError};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<dsl::ParseError> for CliError {
    fn from(e: dsl::ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// A numerical procedure gave up; no verdict.
    Abort,
    /// Reported values only.
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Outcome,
    pub tolerance: String,
    pub samples: Option<usize>,
    pub witnesses: Vec<Value>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, verdict: Outcome, tolerance: impl Into<String>) -> Check {
        Check {
            name: name.to_string(),
            verdict,
            tolerance: tolerance.into(),
            samples: None,
            witnesses: Vec::new(),
            detail: String::new(),
        }
    }

    fn pass_if(name: &str, ok: bool, tolerance: impl Into<String>) -> Check {
        Check::new(name, if ok { Outcome::Pass } else { Outcome::Fail }, tolerance)
    }

    fn info(name: &str, detail: impl Into<String>) -> Check {
        Check::new(name, Outcome::Info, "n/a").detail(detail)
    }

    fn abort(name: &str, err: impl std::fmt::Display) -> Check {
        Check::new(name, Outcome::Abort, "n/a").detail(err.to_string())
    }

    fn detail(mut self, d: impl Into<String>) -> Check {
        self.detail = d.into();
        self
    }

    fn samples(mut self, n: usize) -> Check {
        self.samples = Some(n);
        self
    }

    fn witness(mut self, w: impl Serialize) -> Check {
        self.witnesses.push(serde_json::to_value(w).unwrap_or(Value::Null));
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: u64,
    pub command: String,
    pub system: String,
    /// SHA-256 of the input document bytes.
    pub fingerprint: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| matches!(c.verdict, Outcome::Pass | Outcome::Info))
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| matches!(c.verdict, Outcome::Fail | Outcome::Abort))
    }

    /// 0 pass, 1 a check failed, 3 a numerical abort.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.verdict == Outcome::Abort) {
            3
        } else if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pg {} {}  [{}] seed={} sha256={}", self.command, self.system, self.tool_version, self.seed, self.fingerprint);
        for c in &self.checks {
            let tag = match c.verdict {
                Outcome::Pass => "PASS ",
                Outcome::Fail => "FAIL ",
                Outcome::Abort => "ABORT",
                Outcome::Info => "INFO ",
            };
            let _ = write!(s, "{tag} {:<28} tol: {}", c.name, c.tolerance);
            if let Some(n) = c.samples {
                let _ = write!(s, ", {n} samples");
            }
            s.push('\n');
            if !c.detail.is_empty() {
                for line in c.detail.lines() {
                    let _ = writeln!(s, "      {line}");
                }
            }
            for w in &c.witnesses {
                let _ = writeln!(s, "      witness: {w}");
            }
        }
        match self.first_failure() {
            Some(c) => {
                let w = c.witnesses.first().map(|w| w.to_string()).unwrap_or_else(|| "-".into());
                let _ = writeln!(s, "first failing check: {} at {}", c.name, w);
            }
            None => s.push_str("all checks passed\n"),
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub system: Option<String>,
    pub samples: usize,
    pub seed: u64,
    pub trials: usize,
    /// Output path for trajectory CSV (verify-dancing).
    pub csv: Option<std::path::PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { system: None, samples: 20, seed: 0, trials: 50, csv: None }
    }
}

impl RunOptions {
    fn zero_test(&self) -> ZeroTest {
        ZeroTest::new(self.seed, self.trials)
    }
}

/// A parsed document with its fingerprint.
#[derive(Debug, Clone, Default)]
pub struct Input {
    pub doc: Document,
    pub fingerprint: String,
}

impl Input {
    pub fn from_text(text: &str) -> Result<Input, CliError> {
        Ok(Input { doc: dsl::parse(text)?, fingerprint: hex_sha256(text.as_bytes()) })
    }

    pub fn from_path(path: &Path) -> Result<Input, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Input::from_text(&text)
    }

    /// No document: only catalog names resolve.
    pub fn empty() -> Input {
        Input { doc: Document::default(), fingerprint: hex_sha256(b"") }
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Invariants,
    Classify,
    VerifyChains,
    VerifyCr,
    VerifyDancing,
    Metric,
    Catalog,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::Classify => "classify",
            Command::VerifyChains => "verify-chains",
            Command::VerifyCr => "verify-cr",
            Command::VerifyDancing => "verify-dancing",
            Command::Metric => "metric",
            Command::Catalog => "catalog",
        }
    }

    fn task_name(&self) -> String {
        self.name().replace('-', "_")
    }
}

/// A resolved system.
#[derive(Debug, Clone)]
pub enum Item {
    Scalar(ScalarOde),
    Pair(PairOde),
    Cr(CrGraph),
    Third(ThirdOrderOde),
    Coframe(CoframeMetric),
    Solution(SolutionFunction),
    Task(TaskDecl),
}

impl Item {
    fn kind(&self) -> &'static str {
        match self {
            Item::Scalar(_) => "scalar_ode",
            Item::Pair(_) => "pair_ode",
            Item::Cr(_) => "cr_graph",
            Item::Third(_) => "third_order_ode",
            Item::Coframe(_) => "coframe",
            Item::Solution(_) => "solution_function",
            Item::Task(_) => "task",
        }
    }
}

fn from_decl(kind: &DeclKind) -> Result<Item, CliError> {
    Ok(match kind {
        DeclKind::ScalarOde(s) => Item::Scalar(s.clone()),
        DeclKind::PairOde(p) => Item::Pair(p.clone()),
        DeclKind::CrGraph(g) => Item::Cr(g.clone()),
        DeclKind::Coframe(c) => Item::Coframe(CoframeMetric::from_decl(c).map_err(|e| CliError::Input(e.to_string()))?),
        DeclKind::Task(t) => Item::Task(t.clone()),
    })
}

fn from_catalog(e: CatalogEntry) -> Item {
    match e {
        CatalogEntry::Scalar(s) => Item::Scalar(s),
        CatalogEntry::Pair(p) => Item::Pair(p),
        CatalogEntry::Third(t) => Item::Third(t),
        CatalogEntry::Coframe(c) => Item::Coframe(c),
        CatalogEntry::Solution(s) => Item::Solution(s),
    }
}

/// Looks `name` up in the document, then in the catalog.
pub fn lookup(input: &Input, name: &str) -> Result<Item, CliError> {
    if let Some(k) = input.doc.get(name) {
        return from_decl(k);
    }
    match catalog(name) {
        Ok(e) => Ok(from_catalog(e)),
        Err(_) => Err(CliError::Input(format!("unknown system `{name}`"))),
    }
}

/// `--system`, else a task naming this command, else the first declaration of an accepted kind.
fn resolve(input: &Input, cmd: Command, opts: &RunOptions, accept: &[&str]) -> Result<(String, Item), CliError> {
    let name = if let Some(n) = &opts.system {
        n.clone()
    } else if let Some(n) = input.doc.decls.iter().find_map(|d| match &d.kind {
        DeclKind::Task(t) if t.get("command").and_then(|v| v.as_ident()) == Some(&cmd.task_name()) => {
            Some(t.get("system").and_then(|v| v.as_ident()).unwrap_or(&d.name).to_string())
        }
        _ => None,
    }) {
        n
    } else {
        input
            .doc
            .decls
            .iter()
            .find(|d| accept.contains(&d.kind.keyword()))
            .map(|d| d.name.clone())
            .ok_or_else(|| CliError::Input(format!("no {} in document; pass --system", accept.join(" or "))))?
    };
    let item = lookup(input, &name)?;
    if !accept.contains(&item.kind()) {
        return Err(CliError::Input(format!("`{name}` is a {}, expected {}", item.kind(), accept.join(" or "))));
    }
    Ok((name, item))
}

pub fn run(cmd: Command, input: &Input, opts: &RunOptions) -> Result<Report, CliError> {
    let (system, checks) = match cmd {
        Command::Invariants => {
            let (n, item) = resolve(input, cmd, opts, &["scalar_ode", "pair_ode"])?;
            (n, cmd_invariants(&item, opts))
        }
        Command::Classify => {
            let (n, item) = resolve(input, cmd, opts, &["scalar_ode", "pair_ode"])?;
            (n, cmd_classify(&item, opts)?)
        }
        Command::VerifyChains => {
            let (n, item) = resolve(input, cmd, opts, &["scalar_ode"])?;
            let Item::Scalar(s) = item else { unreachable!() };
            (n, cmd_verify_chains(&s, opts))
        }
        Command::VerifyCr => {
            let (n, item) = resolve(input, cmd, opts, &["pair_ode", "cr_graph"])?;
            (n.clone(), cmd_verify_cr(&n, &item, opts)?)
        }
        Command::VerifyDancing => {
            let (n, item) = resolve(input, cmd, opts, &["solution_function", "task"])?;
            (n.clone(), cmd_verify_dancing(&n, &item, input, opts)?)
        }
        Command::Metric => {
            let (n, item) = resolve(input, cmd, opts, &["coframe"])?;
            let Item::Coframe(cm) = item else { unreachable!() };
            (n, cmd_metric(&cm, opts))
        }
        Command::Catalog => cmd_catalog(input, opts)?,
    };
    Ok(Report {
        tool_version: TOOL_VERSION.to_string(),
        seed: opts.seed,
        command: cmd.name().to_string(),
        system,
        fingerprint: input.fingerprint.clone(),
        checks,
    })
}

type Job<'a> = Box<dyn Fn() -> Vec<Check> + Send + Sync + 'a>;

/// Runs jobs in parallel and concatenates their checks in submission order.
fn run_jobs(jobs: Vec<Job<'_>>) -> Vec<Check> {
    jobs.par_iter().map(|j| j()).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn identity_tol(test: &ZeroTest) -> String {
    format!("exact identity, {} trials, bound {}", test.trials, test.bound)
}

fn zero_check(name: &str, v: Result<Verdict, impl std::fmt::Display>, test: &ZeroTest, want_zero: bool) -> Check {
    match v {
        Ok(v) => {
            let c = Check::pass_if(name, v.is_zero() == want_zero, identity_tol(test)).samples(test.trials);
            match v.witness() {
                Some(w) => c.witness(w),
                None => c,
            }
        }
        Err(e) => Check::abort(name, e),
    }
}

/// Turns a decided check into a report line; aborts are kept.
fn informational(mut c: Check, if_pass: &str, if_fail: &str) -> Check {
    match c.verdict {
        Outcome::Pass => c.detail = if_pass.into(),
        Outcome::Fail => c.detail = if_fail.into(),
        _ => return c,
    }
    c.verdict = Outcome::Info;
    c
}

// ---------- invariants ----------

fn cmd_invariants(item: &Item, opts: &RunOptions) -> Vec<Check> {
    let test = opts.zero_test();
    match item {
        Item::Scalar(s) => {
            let inv = scalar_invariants(s);
            vec![
                Check::info("T1", inv.t1.to_string()),
                Check::info("C1", inv.c1.to_string()),
                informational(zero_check("flat (T1 = C1 = 0)", test.check_all([&inv.t1, &inv.c1]), &test, true), "flat", "not flat"),
            ]
        }
        Item::Pair(p) => {
            let inv = fels_invariants(p);
            let mut out = Vec::new();
            let mut t = String::new();
            for i in 0..2 {
                for j in 0..2 {
                    let _ = writeln!(t, "T^{}_{} = {}", i + 1, j + 1, inv.t[i][j]);
                }
            }
            out.push(Check::info("torsion", t.trim_end()));
            let mut c = String::new();
            for i in 0..2 {
                for j in 0..2 {
                    for k in j..2 {
                        for l in k..2 {
                            let _ = writeln!(c, "C^{}_{}{}{} = {}", i + 1, j + 1, k + 1, l + 1, inv.c[i][j][k][l]);
                        }
                    }
                }
            }
            out.push(Check::info("curvature", c.trim_end()));
            let a = torsion_quadric(&inv);
            let w = curvature_quartic(&inv);
            out.push(Check::info(
                "quadric A",
                a.a.iter().enumerate().map(|(i, e)| format!("A{i} = {e}")).collect::<Vec<_>>().join("\n"),
            ));
            out.push(Check::info(
                "quartic W",
                w.w.iter().enumerate().map(|(i, e)| format!("W{i} = {e}")).collect::<Vec<_>>().join("\n"),
            ));
            let tz = test.check_all(inv.t.iter().flatten());
            out.push(informational(zero_check("torsion-free", tz, &test, true), "torsion vanishes identically", "torsion is nonzero"));
            out
        }
        _ => unreachable!(),
    }
}

// ---------- classify ----------

fn pair_of(item: &Item) -> PairOde {
    match item {
        Item::Pair(p) => p.clone(),
        Item::Scalar(s) => chain_pair_from_scalar(s),
        _ => unreachable!(),
    }
}

fn classify_checks(pair: &PairOde, opts: &RunOptions, want: Option<(&str, fn(&crate::algebraic_type::RootProfile) -> bool)>) -> Result<Vec<Check>, CliError> {
    let inv = fels_invariants(pair);
    let (a, w) = (torsion_quadric(&inv), curvature_quartic(&inv));
    let s = match survey(&a, &w, &pair.chart_refs(), opts.samples, opts.seed) {
        Ok(s) => s,
        Err(ClassifyError::SamplingExhausted(n)) => {
            return Ok(vec![Check::abort("type survey", format!("no admissible point after {n} attempts"))])
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let tol = format!("root clustering {:e}, exact where rational", crate::algebraic_type::DEFAULT_TOL);
    let mut out = Vec::new();
    let c = match (s.uniform(), s.disagreement()) {
        (Some((qt, qd)), _) => Check::pass_if("uniform type", true, tol.clone()).detail(format!("quartic {qt}; quadric {qd}")),
        (None, Some(p)) => Check::pass_if("uniform type", false, tol.clone())
            .detail(format!("quartic {} vs {}", s.samples[0].quartic.type_key(), p.quartic.type_key()))
            .witness(&p.point),
        _ => Check::abort("uniform type", "no samples"),
    };
    out.push(c.samples(s.samples.len()));
    if let Some((name, pred)) = want {
        let bad = s.samples.iter().find(|p| !pred(&p.quartic));
        let mut c = Check::pass_if(name, bad.is_none(), tol).samples(s.samples.len());
        if let Some(b) = bad {
            c = c.detail(format!("quartic {}", b.quartic.type_key())).witness(&b.point);
        }
        out.push(c);
    }
    let flags: Vec<&str> = s.samples.first().map(|p| p.flags.names()).unwrap_or_default();
    let all_same = s.samples.iter().all(|p| Some(p.flags) == s.samples.first().map(|f| f.flags));
    out.push(Check::info(
        "admissibility",
        format!("{}{}", if flags.is_empty() { "none".to_string() } else { flags.join(", ") }, if all_same { "" } else { " (varies)" }),
    ));
    Ok(out)
}

fn cmd_classify(item: &Item, opts: &RunOptions) -> Result<Vec<Check>, CliError> {
    classify_checks(&pair_of(item), opts, None)
}

// ---------- verify-chains ----------

fn cmd_verify_chains(s: &ScalarOde, opts: &RunOptions) -> Vec<Check> {
    let test = opts.zero_test();
    let pair = chain_pair_from_scalar(s);
    let std = s.renamed(["x", "y", "p"]);
    let jobs: Vec<Job> = vec![
        Box::new(|| {
            vec![Check::info("chain pair", format!("y'' = {}\np'' = {}", pair.f[0], pair.f[1]))]
        }),
        Box::new(|| match chain_pair_via_rho(&std, &test) {
            Ok(via) => {
                let v = test.check_all([&(&via.f[0] - &pair.f[0]), &(&via.f[1] - &pair.f[1])]);
                vec![zero_check("rho kernel = closed form", v, &test, true)]
            }
            Err(e) => vec![Check::pass_if("rho kernel = closed form", false, identity_tol(&test)).detail(e.to_string())],
        }),
        Box::new(|| {
            let rho = rho_chain(&std);
            let d = exterior_derivative(&rho).vanishes(&test);
            let sq = wedge(&rho, &rho).and_then(|w| w.vanishes(&test));
            vec![zero_check("d rho = 0", d, &test, true), zero_check("rho ^ rho != 0", sq, &test, false)]
        }),
        Box::new(|| {
            let inv = fels_invariants(&pair);
            let sc = scalar_invariants(s);
            let tz = test.check_all(inv.t.iter().flatten());
            let fz = test.check_all([&sc.t1, &sc.c1]);
            match (tz, fz) {
                (Ok(a), Ok(b)) => {
                    let branch = if a.is_zero() { "torsion zero" } else { "torsion nonzero" };
                    let mut c = Check::pass_if("torsion = 0 iff (T1, C1) = 0", a.is_zero() == b.is_zero(), identity_tol(&test))
                        .detail(format!("{branch}; (T1, C1) {}", if b.is_zero() { "zero" } else { "nonzero" }));
                    if let Some(w) = a.witness() {
                        c = c.witness(w);
                    }
                    vec![c]
                }
                (Err(e), _) | (_, Err(e)) => vec![Check::abort("torsion = 0 iff (T1, C1) = 0", e)],
            }
        }),
        Box::new(|| match classify_checks(&pair, opts, Some(("quartic type D_r", |q| q.is_d_r()))) {
            Ok(mut v) => {
                v.retain(|c| c.name == "quartic type D_r" || c.verdict == Outcome::Abort);
                v
            }
            Err(e) => vec![Check::abort("quartic type D_r", e)],
        }),
    ];
    run_jobs(jobs)
}

// ---------- verify-cr ----------

fn cmd_verify_cr(name: &str, item: &Item, opts: &RunOptions) -> Result<Vec<Check>, CliError> {
    let test = opts.zero_test();
    match item {
        Item::Cr(g) => {
            let mut out = Vec::new();
            match constructions::cr_adapted_coframe(g, &test) {
                Ok(cf) => {
                    out.push(Check::pass_if("Levi form nondegenerate", true, identity_tol(&test)).detail(format!("C = {}", cf.c)));
                    for (i, w) in cf.omega.iter().enumerate() {
                        out.push(Check::info(&format!("omega{i}"), w.to_string()));
                    }
                }
                Err(ConstructionError::DegenerateLocus) => {
                    out.push(Check::pass_if("Levi form nondegenerate", false, identity_tol(&test)).detail("C vanishes identically"))
                }
                Err(e) => out.push(Check::abort("Levi form nondegenerate", e)),
            }
            Ok(out)
        }
        Item::Pair(p) => {
            let inv = fels_invariants(p);
            let tz = test.check_all(inv.t.iter().flatten());
            let mut out = classify_checks(p, opts, Some(("quartic type D_c", |q| q.is_d_c())))?;
            out.retain(|c| c.name != "uniform type");
            out.push(informational(zero_check("torsion-free", tz, &test, true), "flat CR structure", "non-flat CR structure"));
            if name == "cr_sphere_pair" {
                let e = (Expr::var("Y").powi(2) + Expr::one()).powi(2) / Expr::var("y2") - Expr::var("Y") * Expr::var("x")
                    + Expr::var("y");
                let r = crate::numerics::third_order_reduction_check(p, "P", &e, &constructions::submax_ode_2(), &test);
                out.push(match r {
                    Ok(r) => zero_check("third-order reduction", Ok::<_, String>(r.verdict), &test, true),
                    Err(e) => Check::pass_if("third-order reduction", false, identity_tol(&test)).detail(e.to_string()),
                });
            }
            Ok(out)
        }
        _ => unreachable!(),
    }
}

// ---------- verify-dancing ----------

struct DancingJob {
    phi: SolutionFunction,
    anchor: [f64; 4],
    opts: DancingOptions,
    pairs: Vec<(String, PairOde)>,
}

fn num(t: &TaskDecl, key: &str) -> Result<Option<f64>, CliError> {
    match t.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_number()
            .and_then(num_traits::ToPrimitive::to_f64)
            .map(Some)
            .ok_or_else(|| CliError::Input(format!("`{key}` must be a number"))),
    }
}

fn dancing_job(name: &str, item: &Item, input: &Input, test: &ZeroTest) -> Result<DancingJob, CliError> {
    let builtin_pairs = |n: &str| -> Vec<(String, PairOde)> {
        match n {
            "flat_phi" => vec![("flat_dancing_pair".into(), constructions::flat_dancing_pair())],
            "sqrt_phi" => vec![
                ("dancing_sqrt_pair".into(), constructions::dancing_sqrt_pair()),
                ("dancing_sqrt_pair_corrected".into(), constructions::dancing_sqrt_pair_corrected()),
            ],
            _ => vec![],
        }
    };
    match item {
        Item::Solution(phi) => {
            let (anchor, t0, t1) = if name == "sqrt_phi" { ([0.0, 0.0, -1.0, 2.0], 1.0, 3.0) } else { ([0.0, 1.0, 0.0, 0.0], 0.5, 2.0) };
            Ok(DancingJob {
                phi: phi.clone(),
                anchor,
                opts: DancingOptions { t_start: t0, t_end: t1, ..Default::default() },
                pairs: builtin_pairs(name),
            })
        }
        Item::Task(t) => {
            let (phi, mut pairs) = match t.get("phi") {
                Some(v) => match v.as_ident() {
                    Some(n) => match lookup(input, n)? {
                        Item::Solution(s) => (s, builtin_pairs(n)),
                        other => return Err(CliError::Input(format!("`{n}` is a {}, expected a solution function", other.kind()))),
                    },
                    None => (SolutionFunction::new(v.to_expr(), test).map_err(|e| CliError::Input(e.to_string()))?, vec![]),
                },
                None => return Err(CliError::Input(format!("task `{name}` has no `phi`"))),
            };
            if let Some(pn) = t.get("pair").and_then(|v| v.as_ident()) {
                match lookup(input, pn)? {
                    Item::Pair(p) => pairs = vec![(pn.to_string(), p)],
                    other => return Err(CliError::Input(format!("`{pn}` is a {}, expected a pair", other.kind()))),
                }
            }
            let d = DancingOptions::default();
            let mut anchor = [0.0, 1.0, 0.0, 0.0];
            for (i, k) in ["anchor_t", "anchor_z", "anchor_a", "anchor_b"].iter().enumerate() {
                if let Some(x) = num(t, k)? {
                    anchor[i] = x;
                }
            }
            let opts = DancingOptions {
                t_start: num(t, "t_start")?.unwrap_or(d.t_start),
                t_end: num(t, "t_end")?.unwrap_or(d.t_end),
                samples: num(t, "points")?.map(|x| x as usize).unwrap_or(d.samples),
                ..d
            };
            Ok(DancingJob { phi, anchor, opts, pairs })
        }
        _ => unreachable!(),
    }
}

pub const DANCING_RESIDUAL_TOL: f64 = 1e-6;

fn cmd_verify_dancing(name: &str, item: &Item, input: &Input, opts: &RunOptions) -> Result<Vec<Check>, CliError> {
    let test = opts.zero_test();
    let job = dancing_job(name, item, input, &test)?;
    let curve = match dancing_curve_numeric(&job.phi, job.anchor, &job.opts) {
        Ok(c) => c,
        Err(ConstructionError::NonTransverse) => {
            return Ok(vec![Check::pass_if("transverse anchor", false, "|Phi(anchor)| > 1e-12")
                .detail("anchor lies on its own solution")
                .witness(job.anchor)])
        }
        Err(e @ (ConstructionError::NewtonDiverged(_) | ConstructionError::JacobianSingular(_))) => {
            return Err(CliError::Numerical(e.to_string()))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    if let Some(path) = &opts.csv {
        std::fs::write(path, curve.to_csv()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    let mut out = vec![Check::pass_if("transverse anchor", true, "|Phi(anchor)| > 1e-12").witness(job.anchor)];
    let max_res = curve.samples.iter().map(|s| s.res).fold(0.0, f64::max);
    out.push(
        Check::pass_if("constraint residual", max_res < 1e-10, "max |constraints| < 1e-10")
            .samples(curve.samples.len())
            .detail(format!("max {max_res:.3e} on t in [{}, {}]", job.opts.t_start, job.opts.t_end)),
    );
    for (pn, pair) in &job.pairs {
        let name = format!("satisfies {pn}");
        out.push(match curve.pair_residual(pair) {
            Ok(r) if r.is_finite() => Check::pass_if(&name, r < DANCING_RESIDUAL_TOL, format!("max |residual| < {DANCING_RESIDUAL_TOL:e}"))
                .samples(curve.samples.len())
                .detail(format!("max residual {r:.3e}")),
            Ok(r) => Check::pass_if(&name, false, format!("max |residual| < {DANCING_RESIDUAL_TOL:e}")).detail(format!("residual {r}")),
            Err(e) => Check::pass_if(&name, false, format!("max |residual| < {DANCING_RESIDUAL_TOL:e}")).detail(e.to_string()),
        });
    }
    Ok(out)
}

// ---------- metric ----------

pub const EINSTEIN_TOL: f64 = 1e-6;

fn cmd_metric(cm: &CoframeMetric, opts: &RunOptions) -> Vec<Check> {
    let test = opts.zero_test();
    let jobs: Vec<Job> = vec![
        Box::new(|| match einstein_check(cm, opts.samples, opts.seed) {
            Ok(r) => {
                let ok = r.is_einstein(EINSTEIN_TOL);
                let sig_ok = r.points.iter().all(|p| p.signature == (2, 2));
                let mut c = Check::pass_if("Einstein", ok, format!("max residual < {EINSTEIN_TOL:e}, lambda spread < {EINSTEIN_TOL:e}"))
                    .samples(r.points.len())
                    .detail(format!(
                        "lambda = {:.12} (spread {:.2e}), max residual {:.2e}",
                        r.lambda_mean, r.lambda_spread, r.max_residual
                    ));
                if !ok {
                    if let Some(p) = r.points.iter().max_by(|a, b| a.residual.total_cmp(&b.residual)) {
                        c = c.witness(p.point);
                    }
                }
                let s = Check::pass_if("signature (2,2)", sig_ok, "eigenvalue signs").samples(r.points.len());
                vec![c, s]
            }
            Err(e @ NumericsError::DegeneratePoint(_)) => vec![Check::pass_if("Einstein", false, "nondegenerate samples").detail(e.to_string())],
            Err(e) => vec![Check::abort("Einstein", e)],
        }),
        Box::new(|| vec![zero_check("Omega closed", closedness_check(&cm.omega(), &test), &test, true)]),
        Box::new(|| {
            let e = &cm.eta;
            let real = |a: usize, b: usize| frobenius_integrable(&[e[a].clone(), e[b].clone()], &test);
            let para = (real(0, 2), real(1, 3));
            if let (Ok(a), Ok(b)) = &para {
                if a.integrable && b.integrable {
                    return vec![Check::pass_if("null distributions integrable", true, identity_tol(&test))
                        .detail("ker{eta1, eta3} and ker{eta2, eta4}")];
                }
            }
            // complex structure with (1,0)-forms eta1 + i eta2, eta3 + i eta4
            let cx = |sign: i64| -> Result<bool, FormError> {
                let g1 = ComplexForm::new(e[0].clone(), e[1].scale(&Expr::int(sign)))?;
                let g2 = ComplexForm::new(e[2].clone(), e[3].scale(&Expr::int(sign)))?;
                Ok(frobenius_integrable_complex(&[g1, g2], &test)?.integrable)
            };
            match (cx(1), cx(-1)) {
                (Ok(true), Ok(true)) => vec![
                    Check::pass_if("null distributions integrable", true, identity_tol(&test))
                        .detail("ker{eta1 + i eta2, eta3 + i eta4} and conjugate"),
                    zero_check("eta1^eta3 + eta2^eta4 closed", closedness_check(&cm.omega_hermitian(), &test), &test, true),
                ],
                _ => {
                    let mut c = Check::pass_if("null distributions integrable", false, identity_tol(&test))
                        .detail("neither the real nor the complex pair is integrable");
                    if let Ok(v) = &para.0 {
                        if let Some(w) = &v.witness {
                            c = c.witness(w);
                        }
                    }
                    vec![c]
                }
            }
        }),
    ];
    run_jobs(jobs)
}

// ---------- catalog ----------

fn cmd_catalog(input: &Input, opts: &RunOptions) -> Result<(String, Vec<Check>), CliError> {
    match &opts.system {
        None => {
            let mut out: Vec<Check> = input.doc.decls.iter().map(|d| Check::info(&d.name, d.kind.keyword())).collect();
            for n in CATALOG_NAMES {
                let item = from_catalog(catalog(n).expect("catalog name"));
                out.push(Check::info(n, format!("builtin {}", item.kind())));
            }
            Ok(("*".into(), out))
        }
        Some(n) => {
            let item = lookup(input, n)?;
            let text = match &item {
                Item::Scalar(s) => format!("z'' = {}  over ({})", s.f, s.chart.join(", ")),
                Item::Pair(p) => format!("F1 = {}\nF2 = {}\nover ({})", p.f[0], p.f[1], p.chart.join(", ")),
                Item::Cr(g) => format!("q = {}  over ({})", g.f, g.chart.join(", ")),
                Item::Third(t) => format!("s' = {}  over ({})", t.f, t.chart.join(", ")),
                Item::Coframe(c) => c.eta.iter().enumerate().map(|(i, e)| format!("eta{} = {e}", i + 1)).collect::<Vec<_>>().join("\n"),
                Item::Solution(s) => format!("Phi = {}", s.phi),
                Item::Task(t) => t.entries.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join("\n"),
            };
            Ok((n.clone(), vec![Check::info(item.kind(), text)]))
        }
    }
}
