//! Cross-module invariants over random model parameters.

use moment_lyapunov::bounds::{find_admissible, lower_bound, upper_bound, WeightFamily};
use moment_lyapunov::fkmc::{convexity_violation, lambda_curve};
use moment_lyapunov::pathsim::RngPolicy;
use moment_lyapunov::spectral::{solve, GridSpec, SolverOptions};
use moment_lyapunov::{build_model, ModelSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectral_lambda_is_convex(a in -1.0f64..1.0, sigma in 0.5f64..1.5, lo in -3.0f64..0.0) {
        let m = build_model(&ModelSpec::PitchforkQ2 { a, b: 1.0, sigma }).unwrap();
        let grid = GridSpec::interval(6.0 * m.domain_scale(), 400);
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|k| lo + 0.5 * k as f64)
            .map(|p| {
                let w = find_admissible(&m, WeightFamily::ExpQuadratic, p).unwrap();
                (p, solve(&m, p, &grid, &w, &SolverOptions::default()).unwrap().lambda)
            })
            .collect();
        prop_assert!(convexity_violation(&pts) <= 1e-6);
    }

    // the (x²)^A family needs 2Ab < p with A > 1
    #[test]
    fn bounds_sandwich_spectral(p in 2.5f64..20.0, sigma in 0.5f64..1.5) {
        let m = build_model(&ModelSpec::PitchforkQ2 { a: 0.0, b: 1.0, sigma }).unwrap();
        let up = upper_bound(&m, p, WeightFamily::ExpQuadratic).unwrap().value;
        let lo = lower_bound(&m, p, None).unwrap().value;
        let w = find_admissible(&m, WeightFamily::ExpQuadratic, p).unwrap();
        let s = solve(&m, p, &GridSpec::interval(6.0 * m.domain_scale(), 1200), &w, &SolverOptions::default()).unwrap().lambda;
        prop_assert!(lo <= s + 1e-3 && s <= up + 1e-3, "{} {} {}", lo, s, up);
    }

    #[test]
    fn mc_curve_convex_within_noise(seed in 0u64..1000) {
        let m = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
        let grid: Vec<f64> = (0..9).map(|k| -1.0 + 0.15 * k as f64).collect();
        let c = lambda_curve(&m, &grid, 5.0, [0.0; 3], 2000, 250, &RngPolicy::new(seed)).unwrap();
        let se = c.estimates.iter().map(|e| e.se_lambda).fold(0.0, f64::max);
        prop_assert!(c.max_convexity_violation <= 3.0 * se + 1e-12);
    }
}
