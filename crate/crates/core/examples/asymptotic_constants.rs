//! Large-p scaling of the bounds for the three pitchfork functionals.

use moment_lyapunov::bounds::{asymptotic_constants, PitchforkParams, Scenario};

fn main() {
    let prm = PitchforkParams { a: 0.0, b: 1.0, sigma: 1.0 };
    for sc in [Scenario::Q2, Scenario::Q4, Scenario::ItoX { rho: 0.5 }] {
        let r = asymptotic_constants(sc, prm, &[10.0, 100.0, 1000.0]).unwrap();
        println!("{sc:?}: exponent {} limit {:?}", r.exponent, r.limit);
        for row in &r.ladder {
            println!("  p = {:>6}: [{:.5}, {:.5}]", row.p, row.lower_scaled, row.upper_scaled);
        }
    }
}
