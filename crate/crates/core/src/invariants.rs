//! Fels torsion and curvature of ODE pairs, and the scalar invariants of a
//! single second-order ODE.

use crate::expr::{rat, Expr};
use crate::jet::{total_derivative_scalar_unchecked, total_derivative_unchecked, PairOde, ScalarOde};

pub type Matrix2 = [[Expr; 2]; 2];

/// Torsion `T[i][j] = T^i_j` and curvature `C[i][j][k][l] = C^i_{jkl}` (0-based indices).
#[derive(Debug, Clone)]
pub struct FelsInvariants {
    pub t: Matrix2,
    pub c: [[[[Expr; 2]; 2]; 2]; 2],
}

/// Coefficients of `A0 x^2 + 2 A1 x y + A2 y^2`.
#[derive(Debug, Clone)]
pub struct TorsionQuadric {
    pub a: [Expr; 3],
}

/// Coefficients of `W0 x^4 + 4 W1 x^3 y + 6 W2 x^2 y^2 + 4 W3 x y^3 + W4 y^4`.
#[derive(Debug, Clone)]
pub struct CurvatureQuartic {
    pub w: [Expr; 5],
}

#[derive(Debug, Clone)]
pub struct ScalarInvariants {
    pub t1: Expr,
    pub c1: Expr,
}

/// `F^i_j = -∂F^i/∂u^j + ½ D(∂F^i/∂q^j) - ¼ Σ_k ∂F^i/∂q^k ∂F^k/∂q^j`.
pub fn fels_f_matrix(sys: &PairOde) -> Matrix2 {
    let fq: [[Expr; 2]; 2] = std::array::from_fn(|i| std::array::from_fn(|j| sys.f[i].diff(sys.q(j))));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let quad: Expr = (0..2).map(|k| &fq[i][k] * &fq[k][j]).sum();
            Expr::add_all([
                -sys.f[i].diff(sys.u(j)),
                Expr::rational(1, 2) * total_derivative_unchecked(&fq[i][j], sys),
                Expr::rational(-1, 4) * quad,
            ])
        })
    })
}

pub fn fels_torsion(sys: &PairOde) -> Matrix2 {
    trace_free(&fels_f_matrix(sys))
}

fn trace_free(f: &Matrix2) -> Matrix2 {
    let half_tr = Expr::rational(1, 2) * (&f[0][0] + &f[1][1]);
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { &f[i][j] - &half_tr } else { f[i][j].clone() }))
}

/// `C^i_{jkl} = F^i_{jkl} - ¾ F^r_{r(jk} δ^i_{l)}` with the averaging symmetrizer.
pub fn fels_curvature(sys: &PairOde) -> [[[[Expr; 2]; 2]; 2]; 2] {
    let q = |i: usize| sys.q(i).to_string();
    let third = |i: usize, j: usize, k: usize, l: usize| sys.f[i].diff(&q(j)).diff(&q(k)).diff(&q(l));
    // trace[j][k] = Σ_r ∂³F^r/∂q^r∂q^j∂q^k
    let trace: [[Expr; 2]; 2] =
        std::array::from_fn(|j| std::array::from_fn(|k| (0..2).map(|r| third(r, r, j, k)).sum()));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                std::array::from_fn(|l| {
                    // average over the 6 orderings of (j,k,l): δ^i picks the slot left over
                    let idx = [j, k, l];
                    let mut sym = Vec::new();
                    for last in 0..3 {
                        if idx[last] == i {
                            let rest: Vec<usize> = (0..3).filter(|&s| s != last).map(|s| idx[s]).collect();
                            // both orders of the remaining pair give the same symmetric trace term
                            sym.push(Expr::int(2) * &trace[rest[0]][rest[1]]);
                        }
                    }
                    let sym = Expr::constant(rat(1, 6)) * Expr::add_all(sym);
                    third(i, j, k, l) - Expr::rational(3, 4) * sym
                })
            })
        })
    })
}

pub fn fels_invariants(sys: &PairOde) -> FelsInvariants {
    FelsInvariants { t: fels_torsion(sys), c: fels_curvature(sys) }
}

/// `A0 = T^2_1, A1 = T^2_2, A2 = -T^1_2`.
pub fn torsion_quadric(inv: &FelsInvariants) -> TorsionQuadric {
    let t = &inv.t;
    TorsionQuadric { a: [t[1][0].clone(), t[1][1].clone(), -&t[0][1]] }
}

/// `W0 = C^2_111, W1 = C^2_211, W2 = C^2_221, W3 = C^2_222, W4 = -C^1_222`.
pub fn curvature_quartic(inv: &FelsInvariants) -> CurvatureQuartic {
    let c = &inv.c;
    CurvatureQuartic {
        w: [
            c[1][0][0][0].clone(),
            c[1][1][0][0].clone(),
            c[1][1][1][0].clone(),
            c[1][1][1][1].clone(),
            -&c[0][1][1][1],
        ],
    }
}

/// Tresse relative invariants `T1` (torsion-type) and `C1 = F_pppp`.
pub fn scalar_invariants(sys: &ScalarOde) -> ScalarInvariants {
    let (z, p) = (sys.z(), sys.p());
    let d = |e: &Expr| total_derivative_scalar_unchecked(e, sys);
    let f = &sys.f;
    let fp = f.diff(p);
    let fz = f.diff(z);
    let fpp = fp.diff(p);
    let fzp = fz.diff(p);
    let fzz = fz.diff(z);
    let d_fpp = d(&fpp);
    let t1 = Expr::add_all([
        d(&d_fpp),
        Expr::int(-4) * d(&fzp),
        -(&fp * &d_fpp),
        Expr::int(4) * &fp * &fzp,
        Expr::int(-3) * &fz * &fpp,
        Expr::int(6) * fzz,
    ]);
    let c1 = fpp.diff(p).diff(p);
    ScalarInvariants { t1, c1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, v, ZeroTest};

    fn zero(e: &Expr) -> bool {
        ZeroTest::new(1, 30).check(e).unwrap().is_zero()
    }

    #[test]
    fn f_matrix_of_shear() {
        let sys = PairOde::standard(v("u2"), c(0)).unwrap();
        let f = fels_f_matrix(&sys);
        assert_eq!(f[0][1], c(-1));
        assert!(f[0][0].is_zero() && f[1][0].is_zero() && f[1][1].is_zero());
        let z = PairOde::standard(c(0), c(0)).unwrap();
        assert!(fels_f_matrix(&z).iter().flatten().all(|e| e.is_zero()));
    }

    #[test]
    fn curvature_of_cubic() {
        let sys = PairOde::standard(c(0), v("q1").powi(3)).unwrap();
        let cc = fels_curvature(&sys);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = if (i, j, k, l) == (1, 0, 0, 0) { c(6) } else { c(0) };
                        assert_eq!(cc[i][j][k][l], want, "C^{i}_{j}{k}{l}");
                    }
                }
            }
        }
    }

    #[test]
    fn trace_identities_on_a_nonlinear_pair() {
        let sys = PairOde::standard(
            v("q1").powi(3) * v("u2") + v("q2").powi(2) * v("t"),
            v("q1") * v("q2").powi(2) - v("u1") * v("q1").powi(3),
        )
        .unwrap();
        let inv = fels_invariants(&sys);
        assert!(zero(&(&inv.t[0][0] + &inv.t[1][1])));
        for j in 0..2 {
            for k in 0..2 {
                assert!(zero(&(&inv.c[0][0][j][k] + &inv.c[1][1][j][k])));
            }
        }
    }

    #[test]
    fn quartic_packaging() {
        let sys = PairOde::standard(v("q2").powi(3), v("q1").powi(3)).unwrap();
        let inv = fels_invariants(&sys);
        let w = curvature_quartic(&inv).w;
        assert_eq!(w[0], c(6));
        assert_eq!(w[4], c(-6));
    }

    #[test]
    fn scalar_invariants_of_quartic_and_radical() {
        let s = scalar_invariants(&ScalarOde::standard(v("p").powi(4)).unwrap());
        assert!(zero(&(&s.t1 - c(24) * v("p").powi(8))));
        assert_eq!(s.c1, c(24));
        let r = scalar_invariants(&ScalarOde::standard(v("p").sqrt()).unwrap());
        assert_eq!(r.c1, Expr::rational(-15, 16) * v("p").pow(rat(-7, 2)));
        let flat = scalar_invariants(&ScalarOde::standard(c(0)).unwrap());
        assert!(flat.t1.is_zero() && flat.c1.is_zero());
    }
}
