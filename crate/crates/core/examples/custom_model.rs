//! A user-defined model from polynomial coefficients.

use moment_lyapunov::analysis::lambda_as;
use moment_lyapunov::bounds::{find_admissible, upper_bound, WeightFamily};
use moment_lyapunov::fkmc::estimate_lambda;
use moment_lyapunov::pathsim::RngPolicy;
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec, ScalarField, StateSpace};

fn main() {
    // dx = (x - x^3) dt + 0.8 dW (Stratonovich), A_t = ∫ (x^2 - 1) dt + 0.5 ∫ x dW
    let spec = ModelSpec::Custom {
        state_space: StateSpace::Line,
        drift: ScalarField::poly(&[0.0, 1.0, 0.0, -1.0]),
        noise: vec![ScalarField::Constant(0.8)],
        q0: ScalarField::poly(&[-1.0, 0.0, 1.0]),
        q: vec![ScalarField::poly(&[0.0, 0.5])],
    };
    let model = build_model(&spec).unwrap();
    let p = 0.1;
    let w = find_admissible(&model, WeightFamily::ExpQuadratic, p).unwrap();
    let s = solve(&model, p, &GridSpec::interval(6.0, 1200), &w, &SolverOptions::default()).unwrap();
    let u = upper_bound(&model, p, WeightFamily::ExpQuadratic).unwrap();
    println!("spectral {:.5}, upper bound {:.5}, lambda {:.5}", s.lambda, u.value, lambda_as(&model).unwrap());
    // the finite-t bias decays like 1/t
    for t in [20.0, 80.0] {
        let mc = estimate_lambda(&model, p, t, [0.0; 3], 10_000, (100.0 * t) as usize, &RngPolicy::new(9)).unwrap();
        println!("Monte Carlo t = {t}: {:.5} ± {:.5} (ess {:.0})", mc.lambda_t, mc.se_lambda, mc.ess);
    }
}
