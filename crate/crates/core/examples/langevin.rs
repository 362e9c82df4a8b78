//! Monte Carlo Λ_t(p) for the damped double-well oscillator.

use moment_lyapunov::fkmc::lambda_curve;
use moment_lyapunov::pathsim::RngPolicy;
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::Langevin { a: 1.0, b: 1.0, beta: 1.0, sigma: 1.0 }).unwrap();
    let t = 10.0;
    let curve = lambda_curve(&model, &[-0.5, 0.0, 0.5, 1.0], t, [1.0, 0.0, 0.0], 1000, 10_000, &RngPolicy::new(2)).unwrap();
    for e in &curve.estimates {
        println!("p = {:>5}: Lambda_t = {:.5} ± {:.5}  blowups {}", e.p, e.lambda_t, e.se_lambda, e.n_blowups);
    }
}
