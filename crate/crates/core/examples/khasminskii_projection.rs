//! Angle projection of a 2D linear system: spectral Λ on the circle and a pathwise check.

use moment_lyapunov::bounds::LyapunovWeight;
use moment_lyapunov::pathsim::{gaussian_increments, simulate_linear_2d, simulate_path_heun, RngPolicy};
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::project_linear_2d;

fn main() {
    let b0 = [[-0.2, 1.0], [-1.0, -0.2]];
    let b1 = [[0.3, 0.0], [0.0, -0.3]];
    let model = project_linear_2d(&b0, &[b1]).unwrap();
    for p in [-1.0, 0.0, 1.0, 2.0] {
        let r = solve(&model, p, &GridSpec::circle(256), &LyapunovWeight::UNIT, &SolverOptions::default()).unwrap();
        println!("p = {p:>4}: Lambda = {:.6}", r.lambda);
    }
    let (t, n) = (2.0, 8000);
    let inc = gaussian_increments(&mut RngPolicy::new(5).stream_for(0), n, 1, t / n as f64);
    let v = simulate_linear_2d(&b0, &[b1], [1.0, 0.0], t, &inc);
    let a = simulate_path_heun(&model, [0.0; 3], t, &inc).a_final.unwrap();
    println!("log|v_t| = {:.8}, A_t = {:.8}", v[0].hypot(v[1]).ln(), a);
}
