//! Samples a dancing curve from a solution function and writes it as CSV to stdout.

use pathgeom::constructions::{dancing_curve_numeric, dancing_sqrt_pair_corrected, DancingOptions, SolutionFunction};

fn main() {
    let opts = DancingOptions { t_start: 1.0, t_end: 3.0, ..Default::default() };
    let curve = dancing_curve_numeric(&SolutionFunction::sqrt_example(), [0.0, 0.0, -1.0, 2.0], &opts).unwrap();
    println!("t,z,a,b,residual");
    for s in &curve.samples {
        println!("{},{},{},{},{:e}", s.t, s.z, s.a, s.b, s.res);
    }
    eprintln!("max pair residual: {:.2e}", curve.pair_residual(&dancing_sqrt_pair_corrected()).unwrap());
}
