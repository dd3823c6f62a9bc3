//! Einstein constant and closedness of Omega for the two model coframes.

use pathgeom::constructions::{dancing_metric_coframe, fubini_study_coframe};
use pathgeom::expr::ZeroTest;
use pathgeom::numerics::{closedness_check, einstein_check};

fn main() {
    let test = ZeroTest::new(0, 50);
    for (name, cm) in [("dancing", dancing_metric_coframe()), ("Fubini-Study", fubini_study_coframe())] {
        let r = einstein_check(&cm, 20, 0).unwrap();
        println!("{name}: lambda = {:.6} (spread {:.1e})", r.lambda_mean, r.lambda_spread);
        println!("  d(eta1^eta4 + eta2^eta3) = 0: {}", closedness_check(&cm.omega(), &test).unwrap().is_zero());
        println!("  d(eta1^eta3 + eta2^eta4) = 0: {}", closedness_check(&cm.omega_hermitian(), &test).unwrap().is_zero());
    }
}
