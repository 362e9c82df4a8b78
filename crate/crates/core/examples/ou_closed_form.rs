//! Principal eigenvalue of the twisted OU generator against its closed form.

use moment_lyapunov::bounds::LyapunovWeight;
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let (a, sigma) = (1.0, 1.0);
    let model = build_model(&ModelSpec::OuQuadratic { a, sigma }).unwrap();
    let grid = GridSpec::interval(6.0, 1200);
    let weight = LyapunovWeight::exp_quadratic(0.5);
    println!("{:>8} {:>12} {:>12} {:>10}", "p", "spectral", "exact", "error");
    for p in [-2.0, -1.0, -0.5, 0.0, 0.2, 0.375, 0.45] {
        let r = solve(&model, p, &grid, &weight, &SolverOptions::default()).unwrap();
        let exact = 0.5 * (a - (a * a - 2.0 * p * sigma * sigma).sqrt());
        println!("{p:>8} {:>12.8} {exact:>12.8} {:>10.2e}", r.lambda, (r.lambda - exact).abs());
    }
}
