//! Stationary density, almost-sure exponent and Poisson checks for a pitchfork model.

use moment_lyapunov::analysis::{lambda_as, stationary_density};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::PitchforkQ2 { a: 1.0, b: 1.0, sigma: 0.7 }).unwrap();
    let d = stationary_density(&model).unwrap();
    let mean_x2 = d.integrate(|x| x * x);
    println!("normalization residual {:.1e}", d.normalization_residual);
    println!("E[x^2] = {mean_x2:.6}, lambda = {:.6}", lambda_as(&model).unwrap());
    let cdf = d.cdf();
    for x in [-1.5, -1.0, 0.0, 1.0, 1.5] {
        println!("F({x:>4}) = {:.5}", cdf(x));
    }
}
