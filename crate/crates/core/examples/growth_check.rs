//! Growth-condition audit on either side of the OU critical exponent.

use moment_lyapunov::bounds::{check_growth, find_admissible, scan_grid, WeightFamily};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    for p in [0.25, 0.49, 0.51] {
        match find_admissible(&model, WeightFamily::ExpQuadratic, p) {
            Ok(w) => {
                let r = check_growth(&model, &w, p, &scan_grid(8.0, 801)).unwrap();
                println!(
                    "p = {p}: {w}  sup = {:.5}  tail {:?}  beta2 = {:?}  beta3 = {:?}",
                    r.gamma_sup, r.tail_excess, r.cond2.beta, r.cond3.beta
                );
            }
            Err(e) => println!("p = {p}: {e}"),
        }
    }
}
