//! Scalar invariants of z'' = F and torsion of the associated chain pair.

use pathgeom::constructions::chain_pair_from_scalar;
use pathgeom::expr::{Expr, ZeroTest};
use pathgeom::invariants::{fels_torsion, scalar_invariants};
use pathgeom::jet::ScalarOde;

fn main() {
    let test = ZeroTest::new(0, 50).nonzero(Expr::var("Y") - Expr::var("p"));
    for src in ["0", "z", "p^2", "p^3", "p^4", "t*p"] {
        let f = pathgeom::dsl::parse_expr(src).unwrap();
        let sys = ScalarOde::standard(f).unwrap();
        let inv = scalar_invariants(&sys);
        let pair = chain_pair_from_scalar(&sys);
        let torsion = test.check_all(fels_torsion(&pair).iter().flatten()).unwrap();
        println!("F = {src:<4}  T1 = {:<12}  C1 = {:<8}  chain torsion zero: {}", inv.t1, inv.c1, torsion.is_zero());
    }
}
