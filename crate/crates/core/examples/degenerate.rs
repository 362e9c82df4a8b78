//! A functional that telescopes: Λ vanishes and A_t = x_0 − x_t.

use moment_lyapunov::analysis::{lambda_as, poisson_residual, variance_identity};
use moment_lyapunov::pathsim::{simulate_path, RngPolicy};
use moment_lyapunov::{build_model, ModelSpec, ScalarField};

fn main() {
    let model = build_model(&ModelSpec::OuLinearDegenerate { a: 1.0, sigma: 1.0 }).unwrap();
    let s = simulate_path(&model, [0.3, 0.0, 0.0], 5.0, 500, &mut RngPolicy::new(1).stream_for(0));
    println!("A_t = {:.12}, x0 - x_t = {:.12}", s.a_final.unwrap(), 0.3 - s.x_final[0]);
    let phi = ScalarField::poly(&[0.0, 1.0]);
    let grid: Vec<f64> = (-50..=50).map(|k| 0.1 * k as f64).collect();
    let r = poisson_residual(&model, &phi, 0.0, &grid).unwrap();
    println!("lambda = {:.2e}", lambda_as(&model).unwrap());
    println!("Poisson residual {:.1e}, channel residuals {:?}", r.residual, r.channel_residuals);
    println!("variance identity {:.1e}", variance_identity(&model, &phi).unwrap());
}
