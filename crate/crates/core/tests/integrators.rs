//! Pathwise agreement between integrators and the linear system they project.

use moment_lyapunov::pathsim::{gaussian_increments, simulate_linear_2d, simulate_path_heun, simulate_path_increments, RngPolicy};
use moment_lyapunov::{build_model, project_linear_2d, ModelSpec};

fn coarsen(inc: &[f64], m: usize) -> Vec<f64> {
    inc.chunks_exact(2 * m)
        .flat_map(|c| (0..m).map(move |j| c[j] + c[m + j]))
        .collect()
}

/// Euler on the Itô form and Heun on the Stratonovich form converge to the same path.
#[test]
fn ito_and_stratonovich_forms_agree() {
    let spec = ModelSpec::Custom {
        state_space: moment_lyapunov::StateSpace::Line,
        drift: moment_lyapunov::ScalarField::poly(&[0.0, -1.0]),
        noise: vec![moment_lyapunov::ScalarField::poly(&[0.4, 0.3])],
        q0: moment_lyapunov::ScalarField::poly(&[0.0, 0.0, 1.0]),
        q: vec![moment_lyapunov::ScalarField::poly(&[0.0, 0.5])],
    };
    let model = build_model(&spec).unwrap();
    let t = 1.0;
    let mut fine = gaussian_increments(&mut RngPolicy::new(4).stream_for(0), 1 << 16, 1, t / (1 << 16) as f64);
    let mut errs = Vec::new();
    for _ in 0..4 {
        let em = simulate_path_increments(&model, [0.2, 0.0, 0.0], t, &fine);
        let heun = simulate_path_heun(&model, [0.2, 0.0, 0.0], t, &fine);
        errs.push((em.x_final[0] - heun.x_final[0]).abs() + (em.a_final.unwrap() - heun.a_final.unwrap()).abs());
        fine = coarsen(&fine, 1);
    }
    // errs run from fine to coarse
    assert!(errs[0] < 1e-2, "{errs:?}");
    assert!(errs[0] < errs[3], "{errs:?}");
}

#[test]
fn norm_of_linear_system_matches_exp_functional() {
    let b0 = [[0.1, -0.7], [0.4, -0.3]];
    let b = [[[0.2, 0.5], [-0.1, 0.3]], [[0.0, 0.4], [0.4, 0.1]]];
    let model = project_linear_2d(&b0, &b).unwrap();
    let t = 1.0;
    let n = 1 << 14;
    let mut inc = gaussian_increments(&mut RngPolicy::new(8).stream_for(0), n, 2, t / n as f64);
    let theta0 = 0.9f64;
    let mut errs = Vec::new();
    for _ in 0..3 {
        let v = simulate_linear_2d(&b0, &b, [theta0.cos(), theta0.sin()], t, &inc);
        let a = simulate_path_heun(&model, [theta0, 0.0, 0.0], t, &inc).a_final.unwrap();
        errs.push((v[0].hypot(v[1]) - a.exp()).abs() / a.exp());
        inc = coarsen(&inc, 2);
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[0] <= errs[2], "{errs:?}");
}

/// Euler bias in E[A_t] halves with the step.
#[test]
fn weak_order_one() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    let (t, x0) = (2.0f64, 1.0f64);
    // E ∫ x² dt for x0 = 1, a = σ = 1
    let exact = 0.5 * t + 0.25 * (1.0 - (-2.0 * t).exp());
    let n_paths = 200_000;
    let bias = |n_steps: usize| {
        let b = moment_lyapunov::pathsim::simulate_batch(&model, [x0, 0.0, 0.0], t, n_steps, n_paths, &RngPolicy::new(12));
        let a = b.valid_a();
        let mean = moment_lyapunov::fkmc::pairwise_sum(&a) / a.len() as f64;
        mean - exact
    };
    let (b1, b2) = (bias(10), bias(20));
    let ratio = b1 / b2;
    assert!((1.5..=2.7).contains(&ratio), "bias {b1} then {b2}");
}
