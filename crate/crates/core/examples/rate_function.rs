//! Rate function of A_t/t by Legendre transform of spectral samples.

use moment_lyapunov::analysis::legendre;
use moment_lyapunov::bounds::LyapunovWeight;
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    let grid = GridSpec::interval(6.0, 1200);
    let w = LyapunovWeight::exp_quadratic(0.5);
    let samples: Vec<(f64, f64)> = (0..=78)
        .map(|k| -1.5 + 0.025 * k as f64)
        .map(|p| (p, solve(&model, p, &grid, &w, &SolverOptions::default()).unwrap().lambda))
        .collect();
    let s: Vec<f64> = (1..=12).map(|k| 0.125 * k as f64).collect();
    let table = legendre(&samples, &s, 1e-9).unwrap();
    for r in &table.rows {
        // closed form (2s - 1)^2 / (8s) for this model
        let exact = (2.0 * r.s - 1.0).powi(2) / (8.0 * r.s);
        println!("s = {:.3}  I = {:.6}  exact {:.6}{}", r.s, r.i, exact, if r.boundary_limited { "  (edge)" } else { "" });
    }
}
