//! Principal eigenfunction at p = 0.375 and its refinement study.

use moment_lyapunov::bounds::LyapunovWeight;
use moment_lyapunov::spectral::{refine_and_validate, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    let w = LyapunovWeight::exp_quadratic(0.5);
    let (r, report) = refine_and_validate(&model, 0.375, &w, &GridSpec::interval(6.0, 300), &SolverOptions::default()).unwrap();
    for l in &report.levels {
        println!("n = {:>5}  h = {:.4}  lambda = {:.10}", l.n, l.spacing, l.lambda);
    }
    println!(
        "observed order {:.2}, Richardson {:.10}, domain sensitivity {:.1e}",
        report.observed_order,
        report.richardson,
        report.domain_sensitivity.unwrap_or(f64::NAN)
    );
    let ef = r.eigenfunction();
    let mid = ef.len() / 2;
    let phi0 = ef[mid][3] / (0.25 * ef[mid][0].powi(2)).exp();
    println!("{:>8} {:>14} {:>14}", "x", "phi/phi(0)", "exp(x^2/4)");
    for row in ef.iter().step_by(ef.len() / 24) {
        if row[0].abs() <= 3.0 {
            println!("{:>8.3} {:>14.6} {:>14.6}", row[0], row[3] / phi0, (0.25 * row[0] * row[0]).exp());
        }
    }
}
