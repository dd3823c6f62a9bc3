//! CR sphere pair: integrate a trajectory and check the third-order reduction along it.

use pathgeom::constructions::{cr_sphere_pair, submax_ode_2};
use pathgeom::numerics::{integrate_pair, reduction_residual, IntegrateOptions};

fn main() {
    let pair = cr_sphere_pair();
    let tr = integrate_pair(&pair, [0.2, 0.5, -0.3, 1.4], (0.0, 0.3), &IntegrateOptions::default()).unwrap();
    println!("{} accepted steps, final state {:?}", tr.t.len() - 1, tr.state.last().unwrap());
    println!("max residual of y''' = 3y'(y'')^2/(1 + y'^2): {:.2e}", reduction_residual(&pair, 0, &submax_ode_2(), &tr).unwrap());
}
