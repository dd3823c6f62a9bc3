//! Differentiate, evaluate and identity-test a rational function.

use pathgeom::dsl::parse_expr;
use pathgeom::expr::{Tape, Verdict, ZeroTest};

fn main() {
    let e = parse_expr("(x^2 + y)/(1 + x*y)").unwrap();
    let dx = e.diff("x");
    println!("e     = {e}");
    println!("de/dx = {dx}");

    // quotient rule, checked by random rational evaluation
    let lhs = &dx * (parse_expr("1 + x*y").unwrap());
    let rhs = parse_expr("2*x - (x^2 + y)*y/(1 + x*y)").unwrap();
    match ZeroTest::new(1, 50).check_equal(&lhs, &rhs).unwrap() {
        Verdict::Zero { trials, failure_bound, .. } => {
            println!("identity holds at {trials} points, failure bound {failure_bound:?}")
        }
        Verdict::Nonzero { witness, value } => println!("identity fails at {witness}: {value}"),
    }

    let tape = Tape::compile(&[dx], &["x", "y"]).unwrap();
    println!("de/dx at (0.5, 2) = {}", tape.eval(&[0.5, 2.0]).unwrap()[0]);
}
