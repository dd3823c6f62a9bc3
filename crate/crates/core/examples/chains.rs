//! Chain pairs: closed form against the kernel of the 2-form rho.

use pathgeom::constructions::chain_pair_from_scalar;
use pathgeom::expr::{Expr, ZeroTest};
use pathgeom::forms::{chain_pair_via_rho, rho_chain};
use pathgeom::jet::ScalarOde;

fn main() {
    let test = ZeroTest::new(0, 50).nonzero(Expr::var("Y") - Expr::var("p"));
    let sys = ScalarOde::standard(Expr::var("t") * Expr::var("p")).unwrap();
    println!("rho = {}", rho_chain(&sys));
    let direct = chain_pair_from_scalar(&sys);
    let via = chain_pair_via_rho(&sys, &test).unwrap();
    for i in 0..2 {
        println!("F{} = {}", i + 1, direct.f[i]);
        println!("  agrees with kernel of rho: {}", test.check_equal(&direct.f[i], &via.f[i]).unwrap().is_zero());
    }
}
