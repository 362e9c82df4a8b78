//! Upper and lower bounds around the spectral value for the pitchfork model.

use moment_lyapunov::bounds::{bounds_report, find_admissible, WeightFamily};
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::PitchforkQ2 { a: 0.0, b: 1.0, sigma: 1.0 }).unwrap();
    for p in [1.0, 3.0, 10.0, 30.0] {
        let rep = bounds_report(&model, p, WeightFamily::ExpQuadratic, None).unwrap();
        let w = find_admissible(&model, WeightFamily::ExpQuadratic, p).unwrap();
        let s = solve(&model, p, &GridSpec::interval(6.0, 1200), &w, &SolverOptions::default()).unwrap();
        println!(
            "p = {p:>4}: {:>9.4} <= {:>9.4} <= {:>9.4}",
            rep.lower.map_or(f64::NAN, |l| l.value),
            s.lambda,
            rep.upper.map_or(f64::NAN, |u| u.value)
        );
    }
}
