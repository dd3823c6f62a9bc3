//! Root types of binary quartics, exactly and numerically.

use num_rational::BigRational;
use pathgeom::algebraic_type::{classify_quartic, classify_quartic_exact, DEFAULT_TOL};

fn main() {
    // coefficients (W0..W4) of W0 x^4 + 4 W1 x^3 y + 6 W2 x^2 y^2 + 4 W3 x y^3 + W4 y^4
    let cases: [(&str, [i64; 5]); 5] = [
        ("x^4", [1, 0, 0, 0, 0]),
        ("x^2 y^2", [0, 0, 1, 0, 0]),
        ("x^4 + 6x^2y^2 + y^4", [1, 0, 1, 0, 1]),
        ("x y (x^2 - y^2)", [0, 1, 0, -1, 0]),
        ("x^3 y", [0, 1, 0, 0, 0]),
    ];
    for (name, w) in cases {
        let exact = classify_quartic_exact(&w.map(|k| BigRational::from_integer(k.into())));
        let numeric = classify_quartic(&w.map(|k| k as f64), DEFAULT_TOL).unwrap();
        println!("{name:<20} exact: {exact:<24} numeric: {numeric}");
    }
}
