//! Chain pairs, freestyling pairs, CR coframes, dancing curves and the
//! built-in example catalog.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, IdentityError, Tape, ZeroTest};
use crate::forms::{Form, FormError, CHAIN_CHART};
use crate::jet::{CrGraph, PairOde, ScalarOde, ThirdOrderOde};
use crate::numerics::CoframeMetric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("Levi form degenerates: C vanishes identically")]
    DegenerateLocus,
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),
    #[error("anchor is incident: Φ(t̂, ẑ, â, b̂) = 0")]
    NonTransverse,
    #[error("Newton iteration diverged at t = {0}")]
    NewtonDiverged(f64),
    #[error("constraint Jacobian is singular at t = {0}")]
    JacobianSingular(f64),
    #[error("solution function does not depend on (a, b)")]
    InvalidSolutionFunction,
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Chart of freestyling and dancing pairs: `(t, z, b, z', b')`.
pub const DANCING_CHART: [&str; 5] = ["t", "z", "b", "Z", "B"];

/// The chain pair of `z'' = F` in chart `(x, y, p, Y, P)`, `Y = y'`, `P = p'`.
///
/// With `Δ = Y - p`:
/// `y'' = F + F_p Δ + ½F_pp Δ² + ⅙F_ppp Δ³`,
/// `p'' = -(2/Δ)(P-F)² + F_p(3P-2F) + F_x + pF_y + (F_pp(P-F) + 2F_y)Δ
///        + ⅙(F_ppp(P-2F) - F_xpp + 4F_yp - pF_ypp)Δ²`.
pub fn chain_pair_from_scalar(sys: &ScalarOde) -> PairOde {
    let f = sys.renamed(["x", "y", "p"]).f;
    let (p, cap_p) = (Expr::var("p"), Expr::var("P"));
    let delta = Expr::var("Y") - &p;
    let fp = f.diff("p");
    let fpp = fp.diff("p");
    let fppp = fpp.diff("p");
    let fy = f.diff("y");
    let d2 = delta.powi(2);
    let g1 = Expr::add_all([
        f.clone(),
        &fp * &delta,
        Expr::rational(1, 2) * &fpp * &d2,
        Expr::rational(1, 6) * &fppp * delta.powi(3),
    ]);
    let pf = &cap_p - &f;
    let g2 = Expr::add_all([
        Expr::int(-2) * pf.powi(2) / &delta,
        &fp * (Expr::int(3) * &cap_p - Expr::int(2) * &f),
        f.diff("x"),
        &p * &fy,
        (&fpp * &pf + Expr::int(2) * &fy) * &delta,
        Expr::rational(1, 6)
            * Expr::add_all([
                &fppp * (&cap_p - Expr::int(2) * &f),
                -f.diff_many(&["x", "p", "p"]),
                Expr::int(4) * fy.diff("p"),
                -(&p * fy.diff("p").diff("p")),
            ])
            * &d2,
    ]);
    PairOde::new(CHAIN_CHART, g1, g2).expect("chain chart")
}

/// `(z'' = F, b'' = b'(F - 2b')/(z' - b))` in chart `(t, z, b, Z, B)`.
pub fn freestyle_pair(sys: &ScalarOde) -> PairOde {
    let f = sys.renamed(["t", "z", "Z"]).f;
    let (b, z1, b1) = (Expr::var("b"), Expr::var("Z"), Expr::var("B"));
    let g = &b1 * (&f - Expr::int(2) * &b1) / (z1 - b);
    PairOde::new(DANCING_CHART, f, g).expect("dancing chart")
}

/// `ω⁰, ω¹, ω²` on the CR hypersurface `q = F(x, y, p)` and the function `C`.
#[derive(Debug, Clone)]
pub struct CrCoframe {
    pub c: Expr,
    pub omega: [Form; 3],
}

pub fn cr_adapted_coframe(g: &CrGraph, test: &ZeroTest) -> Result<CrCoframe, ConstructionError> {
    let chart: Vec<&str> = g.chart.iter().map(|s| s.as_str()).collect();
    let (x, y, p) = (chart[0], chart[1], chart[2]);
    let f = &g.f;
    let (fx, fy, fp) = (f.diff(x), f.diff(y), f.diff(p));
    let s = fp.powi(2) + Expr::one();
    let num = Expr::add_all([
        (Expr::int(2) * &fx * &fp - fp.powi(2) * &fy - Expr::int(3) * &fy) * fx.diff(p),
        (Expr::int(2) * &fy * &fp + fp.powi(2) * &fx + Expr::int(3) * &fx) * fy.diff(p),
        Expr::int(-2) * (fx.powi(2) + fy.powi(2)) * fp.diff(p),
        -(&s * (fx.diff(x) + fy.diff(y))),
    ]);
    let c = num / s.powi(2);
    if test.check(&c)?.is_zero() {
        return Err(ConstructionError::DegenerateLocus);
    }
    let two = Expr::int(2);
    let w0 = Form::one_form(
        &chart,
        &[
            (p, Expr::one()),
            (x, &two * (&fx * &fp - &fy) / &s),
            (y, &two * (&fy * &fp + &fx) / &s),
        ],
    )?
    .scale(&c.recip());
    let w1 = Form::dvar(&chart, x)?;
    let w2 = Form::dvar(&chart, y)?.scale(&Expr::int(-1));
    Ok(CrCoframe { c, omega: [w0, w1, w2] })
}

// ---------- dancing curves ----------

/// A general solution `Φ(t, z, a, b) = 0` of a scalar second-order ODE.
#[derive(Debug, Clone)]
pub struct SolutionFunction {
    pub phi: Expr,
}

const PHI_VARS: [&str; 4] = ["t", "z", "a", "b"];

impl SolutionFunction {
    pub fn new(phi: Expr, test: &ZeroTest) -> Result<Self, ConstructionError> {
        for v in phi.free_vars() {
            if !PHI_VARS.contains(&v.as_str()) {
                return Err(ConstructionError::Eval(EvalError::UnboundVariable(v)));
            }
        }
        let da = test.check(&phi.diff("a"))?;
        let db = test.check(&phi.diff("b"))?;
        if da.is_zero() && db.is_zero() {
            return Err(ConstructionError::InvalidSolutionFunction);
        }
        Ok(SolutionFunction { phi })
    }

    /// `z - b t - a`, the lines.
    pub fn flat() -> Self {
        SolutionFunction { phi: Expr::var("z") - Expr::var("b") * Expr::var("t") - Expr::var("a") }
    }

    /// `z - (t³/12 + b t²/4 + b² t/4 + a)`, solving `z'' = sqrt(z')` where `t + b > 0`.
    pub fn sqrt_example() -> Self {
        let (t, b) = (Expr::var("t"), Expr::var("b"));
        let rhs = Expr::add_all([
            Expr::rational(1, 12) * t.powi(3),
            Expr::rational(1, 4) * &b * t.powi(2),
            Expr::rational(1, 4) * b.powi(2) * &t,
            Expr::var("a"),
        ]);
        SolutionFunction { phi: Expr::var("z") - rhs }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DancingOptions {
    pub t_start: f64,
    pub t_end: f64,
    /// Number of output intervals.
    pub samples: usize,
    /// Cap on `|Δ(t, z, a, b)|` per internal step.
    pub max_arc: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub min_step: f64,
    /// Initial guess for `(z, a, b)` at `t_start`; defaults to the anchor.
    pub guess: Option<[f64; 3]>,
}

impl Default for DancingOptions {
    fn default() -> Self {
        DancingOptions {
            t_start: 0.5,
            t_end: 2.0,
            samples: 50,
            max_arc: 0.05,
            newton_tol: 1e-12,
            max_newton: 25,
            min_step: 1e-9,
            guess: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DancingSample {
    pub t: f64,
    pub z: f64,
    pub a: f64,
    pub b: f64,
    /// `(z', a', b')` and `(z'', a'', b'')` by implicit differentiation.
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    /// Max-norm of the three constraints.
    pub res: f64,
}

impl DancingSample {
    /// The state `(t, z, b, z', b')` in the dancing chart.
    pub fn jet(&self) -> [f64; 5] {
        [self.t, self.z, self.b, self.d1[0], self.d1[2]]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DancingCurve {
    pub anchor: [f64; 4],
    pub samples: Vec<DancingSample>,
}

impl DancingCurve {
    /// `t,z,b,res` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,z,b,res\n");
        for p in &self.samples {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", p.t, p.z, p.b, p.res);
        }
        s
    }

    /// Max over samples of `|z'' - F1|` and `|b'' - F2|` for a pair in the dancing chart.
    pub fn pair_residual(&self, pair: &PairOde) -> Result<f64, EvalError> {
        let tape = Tape::compile(&pair.f, &pair.chart_refs())?;
        let mut worst = 0.0f64;
        for s in &self.samples {
            let rhs = tape.eval(&s.jet())?;
            worst = worst.max((s.d2[0] - rhs[0]).abs()).max((s.d2[2] - rhs[1]).abs());
        }
        Ok(worst)
    }
}

/// Φ with its first and second partials over `(t, z, a, b)`.
struct PhiTape {
    tape: Tape,
}

impl PhiTape {
    fn new(phi: &Expr) -> Result<Self, EvalError> {
        let mut outs = vec![phi.clone()];
        let firsts: Vec<Expr> = PHI_VARS.iter().map(|v| phi.diff(v)).collect();
        outs.extend(firsts.iter().cloned());
        for i in 0..4 {
            for j in 0..4 {
                outs.push(firsts[i].diff(PHI_VARS[j]));
            }
        }
        Ok(PhiTape { tape: Tape::compile(&outs, &PHI_VARS)? })
    }

    /// `(value, gradient, hessian)` at `w = (t, z, a, b)`.
    fn eval(&self, w: [f64; 4]) -> Result<(f64, [f64; 4], [[f64; 4]; 4]), EvalError> {
        let o = self.tape.eval(&w)?;
        let g = [o[1], o[2], o[3], o[4]];
        let h = std::array::from_fn(|i| std::array::from_fn(|j| o[5 + 4 * i + j]));
        Ok((o[0], g, h))
    }
}

fn solve3(j: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let m = nalgebra::Matrix3::from_fn(|i, k| j[i][k]);
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    let det = m.determinant();
    if det.abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let x = m.lu().solve(&nalgebra::Vector3::new(r[0], r[1], r[2]))?;
    Some([x[0], x[1], x[2]])
}

struct Dancer {
    phi: PhiTape,
    anchor: [f64; 4],
}

/// Masks of which `(t, z, a, b)` slots vary in each constraint.
const MASKS: [[bool; 4]; 3] = [[true, true, true, true], [false, false, true, true], [true, true, false, false]];

impl Dancer {
    fn points(&self, t: f64, s: [f64; 3]) -> [[f64; 4]; 3] {
        let [th, zh, ah, bh] = self.anchor;
        [[t, s[0], s[1], s[2]], [th, zh, s[1], s[2]], [t, s[0], ah, bh]]
    }

    /// Residuals and Jacobian in `(z, a, b)`.
    fn system(&self, t: f64, s: [f64; 3]) -> Result<([f64; 3], [[f64; 3]; 3]), EvalError> {
        let pts = self.points(t, s);
        let mut r = [0.0; 3];
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            let (v, g, _) = self.phi.eval(pts[i])?;
            r[i] = v;
            for k in 0..3 {
                jac[i][k] = if MASKS[i][k + 1] { g[k + 1] } else { 0.0 };
            }
        }
        Ok((r, jac))
    }

    fn newton(&self, t: f64, mut s: [f64; 3], tol: f64, iters: usize) -> Result<Option<([f64; 3], f64)>, ConstructionError> {
        for _ in 0..iters {
            let (r, jac) = self.system(t, s)?;
            let Some(dx) = solve3(jac, r) else { return Err(ConstructionError::JacobianSingular(t)) };
            let norm0 = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            // damped update
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda >= 1.0 / 64.0 {
                let trial = [s[0] - lambda * dx[0], s[1] - lambda * dx[1], s[2] - lambda * dx[2]];
                if let Ok((rt, _)) = self.system(t, trial) {
                    let nt = rt.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if nt <= norm0 || nt < tol {
                        s = trial;
                        accepted = true;
                        break;
                    }
                }
                lambda /= 2.0;
            }
            if !accepted {
                return Ok(None);
            }
            let step = dx.iter().fold(0.0f64, |m, x| m.max(x.abs())) * lambda;
            let (r, _) = self.system(t, s)?;
            let res = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if step <= tol * (1.0 + s.iter().fold(0.0f64, |m, x| m.max(x.abs()))) && res < 1e-10 {
                return Ok(Some((s, res)));
            }
        }
        Ok(None)
    }

    /// First and second t-derivatives of `(z, a, b)` on the curve.
    fn derivatives(&self, t: f64, s: [f64; 3]) -> Result<([f64; 3], [f64; 3]), ConstructionError> {
        let pts = self.points(t, s);
        let mut jac = [[0.0; 3]; 3];
        let mut gt = [0.0; 3];
        let mut evals = Vec::with_capacity(3);
        for i in 0..3 {
            let (_, g, h) = self.phi.eval(pts[i])?;
            for k in 0..3 {
                jac[i][k] = if MASKS[i][k + 1] { g[k + 1] } else { 0.0 };
            }
            gt[i] = if MASKS[i][0] { g[0] } else { 0.0 };
            evals.push(h);
        }
        let d1 = solve3(jac, gt).ok_or(ConstructionError::JacobianSingular(t))?;
        let d1 = [-d1[0], -d1[1], -d1[2]];
        let w = [1.0, d1[0], d1[1], d1[2]];
        let mut q = [0.0; 3];
        for i in 0..3 {
            let h = &evals[i];
            let mut acc = 0.0;
            for j in 0..4 {
                for k in 0..4 {
                    if MASKS[i][j] && MASKS[i][k] {
                        acc += h[j][k] * w[j] * w[k];
                    }
                }
            }
            q[i] = acc;
        }
        let d2 = solve3(jac, q).ok_or(ConstructionError::JacobianSingular(t))?;
        Ok((d1, [-d2[0], -d2[1], -d2[2]]))
    }
}

/// Traces `{Φ(t,z,a,b) = 0, Φ(t̂,ẑ,a,b) = 0, Φ(t,z,â,b̂) = 0}` over `t`.
pub fn dancing_curve_numeric(
    phi: &SolutionFunction,
    anchor: [f64; 4],
    opts: &DancingOptions,
) -> Result<DancingCurve, ConstructionError> {
    let dancer = Dancer { phi: PhiTape::new(&phi.phi)?, anchor };
    let (v, _, _) = dancer.phi.eval(anchor)?;
    if v.abs() <= 1e-12 {
        return Err(ConstructionError::NonTransverse);
    }
    let guess = opts.guess.unwrap_or([anchor[1], anchor[2], anchor[3]]);
    let t0 = opts.t_start;
    let (mut s, mut res) =
        dancer.newton(t0, guess, opts.newton_tol, 4 * opts.max_newton)?.ok_or(ConstructionError::NewtonDiverged(t0))?;
    let mut t = t0;
    let mut samples = Vec::with_capacity(opts.samples + 1);
    let (d1, d2) = dancer.derivatives(t, s)?;
    samples.push(DancingSample { t, z: s[0], a: s[1], b: s[2], d1, d2, res });
    let n = opts.samples.max(1);
    for k in 1..=n {
        let target = t0 + (opts.t_end - t0) * k as f64 / n as f64;
        while t != target {
            let (d1, d2) = dancer.derivatives(t, s)?;
            let speed = (1.0 + d1.iter().map(|x| x * x).sum::<f64>()).sqrt();
            let mut h = (target - t).abs().min(opts.max_arc / speed) * (target - t).signum();
            loop {
                if h.abs() < opts.min_step {
                    return Err(ConstructionError::NewtonDiverged(t));
                }
                let pred = std::array::from_fn(|i| s[i] + h * d1[i] + 0.5 * h * h * d2[i]);
                let tn = if (target - (t + h)).abs() < 1e-15 * (1.0 + target.abs()) { target } else { t + h };
                match dancer.newton(tn, pred, opts.newton_tol, opts.max_newton) {
                    Ok(Some((sn, r))) => {
                        s = sn;
                        res = r;
                        t = tn;
                        break;
                    }
                    Ok(None) | Err(ConstructionError::JacobianSingular(_)) | Err(ConstructionError::Eval(_)) => {
                        h /= 2.0;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let (d1, d2) = dancer.derivatives(t, s)?;
        samples.push(DancingSample { t, z: s[0], a: s[1], b: s[2], d1, d2, res });
    }
    Ok(DancingCurve { anchor, samples })
}

// ---------- catalog ----------

#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Scalar(ScalarOde),
    Pair(PairOde),
    Third(ThirdOrderOde),
    Coframe(CoframeMetric),
    Solution(SolutionFunction),
}

pub const CATALOG_NAMES: [&str; 14] = [
    "flat_chain_pair",
    "cr_sphere_pair",
    "cr_y3_pair",
    "dancing_sqrt_pair",
    "dancing_sqrt_pair_corrected",
    "flat_dancing_pair",
    "submax_ode_1",
    "submax_ode_2",
    "dancing_metric_coframe",
    "fubini_study_coframe",
    "flat_coframe",
    "flat_phi",
    "sqrt_phi",
    "sqrt_scalar",
];

fn vars5() -> [Expr; 5] {
    CHAIN_CHART.map(Expr::var)
}

pub fn flat_chain_pair() -> PairOde {
    let [_, _, p, y1, p1] = vars5();
    PairOde::new(CHAIN_CHART, Expr::zero(), Expr::int(2) * p1.powi(2) / (p - y1)).expect("chart")
}

pub fn cr_sphere_pair() -> PairOde {
    let [x, y, _, y1, p1] = vars5();
    let den = &y1 * &x + &p1 - &y;
    let s = y1.powi(2) + Expr::one();
    PairOde::new(CHAIN_CHART, s.powi(2) / &den, &s * (&p1 * &y1 - &y * &y1 - &x) / &den).expect("chart")
}

pub fn cr_y3_pair() -> PairOde {
    let [_, y, _, y1, p1] = vars5();
    let i = Expr::int;
    let num1 = Expr::add_all([
        i(16) * y1.powi(4) * y.powi(6),
        i(22) * y1.powi(2) * y.powi(6),
        i(12) * &p1 * y1.powi(2) * y.powi(4),
        i(-2) * p1.powi(2) * y1.powi(2) * y.powi(2),
        i(5) * y.powi(6),
        i(15) * &p1 * y.powi(4),
        i(-5) * p1.powi(2) * y.powi(2),
        p1.powi(3),
    ]);
    let f1 = num1 / (i(16) * y.powi(5) * (&p1 - y.powi(2)));
    let num2 = Expr::add_all([i(8) * y1.powi(2) * y.powi(4), i(15) * y.powi(4), i(10) * &p1 * y.powi(2), -p1.powi(2)]);
    let f2 = num2 * &y1 / (i(8) * y.powi(3));
    PairOde::new(CHAIN_CHART, f1, f2).expect("chart")
}

fn sqrt_pair(sign: i64) -> PairOde {
    let [t, _, b, z1, b1] = DANCING_CHART.map(Expr::var);
    let tb = &t + &b;
    let i = Expr::int;
    let inner = Expr::add_all([
        i(-2) * b1.powi(2) * (&b1 + Expr::one()).powi(2) * &tb,
        i(4) * z1.sqrt() * b1.powi(2),
        i(2) * b1.powi(3) * (tb.powi(2) * &b1 * (&b1 + Expr::one()) - i(4) * &z1 * &b1).sqrt(),
    ]);
    let pre = i(sign) * &b1 * (i(4) * &z1 - tb.powi(2));
    PairOde::new(DANCING_CHART, z1.sqrt(), inner / pre).expect("chart")
}

/// The √(z′) dancing pair in catalog form, prefactor `1/(-b'(4z' - (t+b)²))`.
pub fn dancing_sqrt_pair() -> PairOde {
    sqrt_pair(-1)
}

/// The same pair with prefactor `1/(b'(4z' - (t+b)²))`, which the curves satisfy.
pub fn dancing_sqrt_pair_corrected() -> PairOde {
    sqrt_pair(1)
}

pub fn flat_dancing_pair() -> PairOde {
    let [_, _, b, z1, b1] = DANCING_CHART.map(Expr::var);
    PairOde::new(DANCING_CHART, Expr::zero(), Expr::int(-2) * b1.powi(2) / (z1 - b)).expect("chart")
}

pub fn submax_ode_1() -> ThirdOrderOde {
    let (p1, p2) = (Expr::var("P"), Expr::var("p2"));
    ThirdOrderOde::new(["x", "p", "P", "p2"], Expr::int(3) * p2.powi(2) / (Expr::int(2) * p1)).expect("chart")
}

pub fn submax_ode_2() -> ThirdOrderOde {
    let (y1, y2) = (Expr::var("Y"), Expr::var("y2"));
    ThirdOrderOde::new(["x", "y", "Y", "y2"], Expr::int(3) * &y1 * y2.powi(2) / (Expr::one() + y1.powi(2)))
        .expect("chart")
}

/// Chart `(y, p, Y, P)` of the coframe metrics (the slice `x = const`).
pub const METRIC_CHART: [&str; 4] = ["y", "p", "Y", "P"];

fn one(terms: &[(&str, Expr)]) -> Form {
    Form::one_form(&METRIC_CHART, terms).expect("chart")
}

pub fn dancing_metric_coframe() -> CoframeMetric {
    let [y, p, y1, p1] = METRIC_CHART.map(Expr::var);
    let _ = y;
    let d = &y1 - &p;
    let i = Expr::int;
    let eta1 = one(&[("Y", Expr::one())]);
    let eta2 = one(&[("Y", -(&d * &p1)), ("P", d.powi(2)), ("y", -p1.powi(2)), ("p", i(2) * &d * &p1)])
        .scale(&d.powi(4).recip());
    let eta3 = one(&[("y", Expr::one())]);
    let eta4 = one(&[("y", -&p1), ("p", d.clone())]).scale(&d.powi(3).recip());
    CoframeMetric::new(&METRIC_CHART, [eta1, eta2, eta3, eta4]).expect("chart")
}

pub fn fubini_study_coframe() -> CoframeMetric {
    let [y, _, y1, p1] = METRIC_CHART.map(Expr::var);
    let d = &p1 - &y;
    let i = Expr::int;
    let eta1 = one(&[
        ("Y", d.recip()),
        ("P", -(&y1 / d.powi(2))),
        ("y", -(&y1 * (y1.powi(2) + i(3)) / (i(2) * d.powi(2)))),
        ("p", (Expr::one() + y1.powi(2)).powi(2) / (i(2) * d.powi(3))),
    ]);
    let eta2 = one(&[("P", Expr::one()), ("y", -((i(3) * y1.powi(2) + Expr::one()) / i(2)))]).scale(&d.powi(2).recip());
    let eta3 = one(&[("y", Expr::one()), ("p", -(&y1 / &d))]);
    let eta4 = one(&[("p", d.recip())]);
    CoframeMetric::new(&METRIC_CHART, [eta1, eta2, eta3, eta4]).expect("chart")
}

/// `η¹ = dY, η² = dP, η³ = dy, η⁴ = dp`.
pub fn flat_coframe() -> CoframeMetric {
    let eta = ["Y", "P", "y", "p"].map(|v| one(&[(v, Expr::one())]));
    CoframeMetric::new(&METRIC_CHART, eta).expect("chart")
}

pub fn catalog(name: &str) -> Result<CatalogEntry, ConstructionError> {
    Ok(match name {
        "flat_chain_pair" => CatalogEntry::Pair(flat_chain_pair()),
        "cr_sphere_pair" => CatalogEntry::Pair(cr_sphere_pair()),
        "cr_y3_pair" => CatalogEntry::Pair(cr_y3_pair()),
        "dancing_sqrt_pair" => CatalogEntry::Pair(dancing_sqrt_pair()),
        "dancing_sqrt_pair_corrected" => CatalogEntry::Pair(dancing_sqrt_pair_corrected()),
        "flat_dancing_pair" => CatalogEntry::Pair(flat_dancing_pair()),
        "submax_ode_1" => CatalogEntry::Third(submax_ode_1()),
        "submax_ode_2" => CatalogEntry::Third(submax_ode_2()),
        "dancing_metric_coframe" => CatalogEntry::Coframe(dancing_metric_coframe()),
        "fubini_study_coframe" => CatalogEntry::Coframe(fubini_study_coframe()),
        "flat_coframe" => CatalogEntry::Coframe(flat_coframe()),
        "flat_phi" => CatalogEntry::Solution(SolutionFunction::flat()),
        "sqrt_phi" => CatalogEntry::Solution(SolutionFunction::sqrt_example()),
        "sqrt_scalar" => CatalogEntry::Scalar(ScalarOde::standard(Expr::var("p").sqrt()).expect("chart")),
        _ => return Err(ConstructionError::UnknownName(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, rat, v};

    fn t() -> ZeroTest {
        ZeroTest::new(4, 30).nonzero(v("Y") - v("p"))
    }

    #[test]
    fn flat_chain_pair_matches_display() {
        let pair = chain_pair_from_scalar(&ScalarOde::standard(c(0)).unwrap());
        assert!(pair.f[0].is_zero());
        assert!(t().check_equal(&pair.f[1], &flat_chain_pair().f[1]).unwrap().is_zero());
    }

    #[test]
    fn chain_pair_of_z() {
        let pair = chain_pair_from_scalar(&ScalarOde::standard(v("z")).unwrap());
        let (y, p, y1, p1) = (v("y"), v("p"), v("Y"), v("P"));
        let want = (c(2) * p1.powi(2) - c(4) * &p1 * &y - c(2) * y1.powi(2) + c(3) * &y1 * &p - p.powi(2)
            + c(2) * y.powi(2))
            / (&p - &y1);
        assert_eq!(pair.f[0], y);
        assert!(t().check_equal(&pair.f[1], &want).unwrap().is_zero());
    }

    #[test]
    fn freestyle_examples() {
        let flat = freestyle_pair(&ScalarOde::standard(c(0)).unwrap());
        assert_eq!(flat, flat_dancing_pair());
        let sq = freestyle_pair(&ScalarOde::standard(v("p").sqrt()).unwrap());
        assert_eq!(sq.f[0], v("Z").sqrt());
        let lin = freestyle_pair(&ScalarOde::standard(v("z")).unwrap());
        assert_eq!(lin.f[1], v("B") * (v("z") - c(2) * v("B")) / (v("Z") - v("b")));
    }

    #[test]
    fn cr_coframes() {
        let z = ZeroTest::default();
        let s = cr_adapted_coframe(&CrGraph::standard((v("x").powi(2) + v("y").powi(2)) / c(4)).unwrap(), &z).unwrap();
        assert_eq!(s.c, c(-1));
        let want = Form::one_form(&["x", "y", "p"], &[("p", c(-1)), ("x", v("y")), ("y", -v("x"))]).unwrap();
        assert_eq!(s.omega[0], want);
        let cubic = cr_adapted_coframe(&CrGraph::standard(v("y").powi(3) / c(6)).unwrap(), &z).unwrap();
        assert_eq!(cubic.c, -v("y"));
        assert!(matches!(
            cr_adapted_coframe(&CrGraph::standard(c(0)).unwrap(), &z),
            Err(ConstructionError::DegenerateLocus)
        ));
    }

    #[test]
    fn flat_dancing_curve() {
        let curve = dancing_curve_numeric(&SolutionFunction::flat(), [0.0, 1.0, 0.0, 0.0], &DancingOptions::default())
            .unwrap();
        for s in &curve.samples {
            assert!(s.z.abs() < 1e-12);
            assert!((s.b + 1.0 / s.t).abs() < 1e-10, "{s:?}");
            assert!(s.res < 1e-10);
        }
        assert!(curve.pair_residual(&flat_dancing_pair()).unwrap() < 1e-8);
        assert!(curve.to_csv().starts_with("t,z,b,res\n"));
    }

    #[test]
    fn incident_anchor() {
        let r = dancing_curve_numeric(&SolutionFunction::flat(), [1.0, 3.0, 1.0, 2.0], &DancingOptions::default());
        assert_eq!(r.unwrap_err(), ConstructionError::NonTransverse);
    }

    #[test]
    fn catalog_entries() {
        for n in CATALOG_NAMES {
            assert!(catalog(n).is_ok(), "{n}");
        }
        assert!(matches!(catalog("nope"), Err(ConstructionError::UnknownName(_))));
        let CatalogEntry::Third(s) = catalog("submax_ode_1").unwrap() else { panic!() };
        assert_eq!(s.f, Expr::constant(rat(3, 2)) * v("p2").powi(2) / v("P"));
    }
}
