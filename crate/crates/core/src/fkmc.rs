//! Monte Carlo estimates of `Λ_t(p) = (1/t) log E[e^{pA_t}]` and its p-derivatives.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::FkmcError;
use crate::model::{SdeModel, State};
use crate::pathsim::{simulate_batch, Batch, RngPolicy};

/// Estimates with an effective sample size below this are flagged.
pub const MIN_ESS: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct McLambdaEstimate {
    pub p: f64,
    pub t: f64,
    pub x0: State,
    pub lambda_t: f64,
    pub dlambda_t: f64,
    pub d2lambda_t: f64,
    pub se_lambda: f64,
    pub n_paths: usize,
    pub n_blowups: usize,
    pub ess: f64,
    pub low_confidence: bool,
    /// `p` lies within 10% of the critical exponent of an OU model.
    pub near_critical: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaCurve {
    pub estimates: Vec<McLambdaEstimate>,
    /// Largest amount by which an interior sample sits above its neighbours' chord.
    pub max_convexity_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CltSummary {
    /// Standardized samples `(A_t − t λ_ref)/√t`.
    pub z: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// Kolmogorov–Smirnov distance to `N(0, s²)` when `s²` was given.
    pub ks: Option<f64>,
    pub n_blowups: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdpEstimate {
    pub value: f64,
    pub ess: f64,
    pub low_confidence: bool,
    pub a_t: f64,
    pub b_t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoint {
    pub x0: f64,
    pub value: f64,
    pub ess: f64,
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let (l, r) = v.split_at(v.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

fn pairwise_sum_by(v: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    if v.len() <= 16 {
        v.iter().map(|&x| f(x)).sum()
    } else {
        let (l, r) = v.split_at(v.len() / 2);
        pairwise_sum_by(l, f) + pairwise_sum_by(r, f)
    }
}

/// `log(mean(exp(v)))` with the maximum factored out.
pub fn log_mean_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + (pairwise_sum_by(v, |x| (x - max).exp()) / v.len() as f64).ln()
}

fn ess_of(exponents: &[f64]) -> f64 {
    let max = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s1 = pairwise_sum_by(exponents, |x| (x - max).exp());
    let s2 = pairwise_sum_by(exponents, |x| (2.0 * (x - max)).exp());
    s1 * s1 / s2
}

fn near_critical(model: &SdeModel, p: f64) -> bool {
    model.critical_p().is_some_and(|pc| p >= 0.9 * pc)
}

/// Weighted estimate from final functional values.
pub fn estimate_from_values(a: &[f64], p: f64, t: f64) -> Result<(f64, f64, f64, f64, f64), FkmcError> {
    if a.len() < 2 {
        return Err(FkmcError::Invalid(format!("need at least 2 valid paths, got {}", a.len())));
    }
    let n = a.len();
    let pa: Vec<f64> = a.iter().map(|&v| p * v).collect();
    let max = pa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = pa.iter().map(|&x| (x - max).exp()).collect();
    let s0 = pairwise_sum(&w);
    let lambda_t = (max + (s0 / n as f64).ln()) / t;
    let wa: Vec<f64> = w.iter().zip(a).map(|(w, a)| w * a).collect();
    let mean_w = pairwise_sum(&wa) / s0;
    let wc: Vec<f64> = w.iter().zip(a).map(|(w, a)| w * (a - mean_w) * (a - mean_w)).collect();
    let var_w = pairwise_sum(&wc) / s0;
    let ess = s0 * s0 / pairwise_sum_by(&w, |x| x * x);

    // delta method on √n contiguous batch means of the weights
    let k = ((n as f64).sqrt().floor() as usize).max(2);
    let means: Vec<f64> = (0..k)
        .map(|b| {
            let chunk = &w[b * n / k..(b + 1) * n / k];
            pairwise_sum(chunk) / chunk.len() as f64
        })
        .collect();
    let mbar = pairwise_sum(&means) / k as f64;
    let dev: Vec<f64> = means.iter().map(|m| (m - mbar) * (m - mbar)).collect();
    let var_b = pairwise_sum(&dev) / (k - 1) as f64;
    let se = (var_b / k as f64).sqrt() / mbar / t;

    Ok((lambda_t, mean_w / t, var_w / t, se, ess))
}

fn estimate_from_batch(
    model: &SdeModel,
    batch: &Batch,
    p: f64,
    t: f64,
    x0: State,
) -> Result<McLambdaEstimate, FkmcError> {
    let a = batch.valid_a();
    if a.is_empty() {
        return Err(FkmcError::AllBlownUp(batch.samples.len()));
    }
    let (lambda_t, dlambda_t, d2lambda_t, se_lambda, ess) = estimate_from_values(&a, p, t)?;
    Ok(McLambdaEstimate {
        p,
        t,
        x0,
        lambda_t,
        dlambda_t,
        d2lambda_t,
        se_lambda,
        n_paths: batch.samples.len(),
        n_blowups: batch.n_blowups,
        ess,
        low_confidence: ess < MIN_ESS,
        near_critical: near_critical(model, p),
    })
}

fn validate(t: f64, n_paths: usize, n_steps: usize) -> Result<(), FkmcError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(FkmcError::Invalid(format!("t must be positive, got {t}")));
    }
    if n_paths < 2 {
        return Err(FkmcError::Invalid("n_paths must be at least 2".into()));
    }
    if n_steps < 1 {
        return Err(FkmcError::Invalid("n_steps must be at least 1".into()));
    }
    Ok(())
}

/// Monte Carlo estimate of `Λ_t^{x0}(p)` with derivatives and standard error.
pub fn estimate_lambda(
    model: &SdeModel,
    p: f64,
    t: f64,
    x0: State,
    n_paths: usize,
    n_steps: usize,
    policy: &RngPolicy,
) -> Result<McLambdaEstimate, FkmcError> {
    validate(t, n_paths, n_steps)?;
    let batch = simulate_batch(model, x0, t, n_steps, n_paths, policy);
    estimate_from_batch(model, &batch, p, t, x0)
}

/// Largest violation of discrete convexity over consecutive sample triples.
pub fn convexity_violation(points: &[(f64, f64)]) -> f64 {
    points
        .windows(3)
        .map(|w| {
            let ((p1, l1), (p2, l2), (p3, l3)) = (w[0], w[1], w[2]);
            let chord = ((p3 - p2) * l1 + (p2 - p1) * l3) / (p3 - p1);
            (l2 - chord).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// `Λ_t` over a sorted p grid, reusing one simulated batch for every p.
pub fn lambda_curve(
    model: &SdeModel,
    p_grid: &[f64],
    t: f64,
    x0: State,
    n_paths: usize,
    n_steps: usize,
    policy: &RngPolicy,
) -> Result<LambdaCurve, FkmcError> {
    validate(t, n_paths, n_steps)?;
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FkmcError::Invalid("p grid must be strictly increasing".into()));
    }
    let batch = simulate_batch(model, x0, t, n_steps, n_paths, policy);
    curve_from_batch(model, &batch, p_grid, t, x0)
}

/// `Λ_t` over a p grid from an existing batch.
pub fn curve_from_batch(
    model: &SdeModel,
    batch: &Batch,
    p_grid: &[f64],
    t: f64,
    x0: State,
) -> Result<LambdaCurve, FkmcError> {
    let estimates = p_grid
        .iter()
        .map(|&p| estimate_from_batch(model, batch, p, t, x0))
        .collect::<Result<Vec<_>, _>>()?;
    let pts: Vec<(f64, f64)> = estimates.iter().map(|e| (e.p, e.lambda_t)).collect();
    Ok(LambdaCurve {
        max_convexity_violation: convexity_violation(&pts),
        estimates,
    })
}

/// Kolmogorov–Smirnov distance between a sample and `N(0, s²)`.
pub fn ks_normal(sample: &[f64], s2: f64) -> f64 {
    let normal = Normal::new(0.0, s2.sqrt()).expect("positive variance");
    let mut z = sample.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Standardized samples `(A_t − t λ_ref)/√t` with variance and optional KS distance.
#[allow(clippy::too_many_arguments)]
pub fn clt_sample(
    model: &SdeModel,
    t: f64,
    x0: State,
    n_paths: usize,
    n_steps: usize,
    policy: &RngPolicy,
    lambda_ref: f64,
    s2: Option<f64>,
) -> Result<CltSummary, FkmcError> {
    validate(t, n_paths, n_steps)?;
    let batch = simulate_batch(model, x0, t, n_steps, n_paths, policy);
    let a = batch.valid_a();
    if a.len() < 2 {
        return Err(FkmcError::AllBlownUp(batch.samples.len()));
    }
    let z: Vec<f64> = a.iter().map(|v| (v - t * lambda_ref) / t.sqrt()).collect();
    let n = z.len() as f64;
    let mean = pairwise_sum(&z) / n;
    let dev: Vec<f64> = z.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&dev) / (n - 1.0);
    let ks = s2.map(|s2| ks_normal(&z, s2));
    Ok(CltSummary {
        z,
        mean,
        variance,
        ks,
        n_blowups: batch.n_blowups,
    })
}

/// Moderate-deviation scaled log-moment generating function
/// `(1/a_t) log E[exp(p a_t (A_t − t λ_ref)/b_t)]` with `b_t = t^β`, `a_t = b_t²/t`.
#[allow(clippy::too_many_arguments)]
pub fn mdp_lmgf(
    model: &SdeModel,
    t: f64,
    x0: State,
    beta_exp: f64,
    p: f64,
    n_paths: usize,
    n_steps: usize,
    policy: &RngPolicy,
    lambda_ref: f64,
) -> Result<MdpEstimate, FkmcError> {
    validate(t, n_paths, n_steps)?;
    if !(beta_exp > 0.5 && beta_exp < 1.0) {
        return Err(FkmcError::Invalid(format!("beta_exp must lie in (1/2, 1), got {beta_exp}")));
    }
    let b_t = t.powf(beta_exp);
    let a_t = b_t * b_t / t;
    let batch = simulate_batch(model, x0, t, n_steps, n_paths, policy);
    let a = batch.valid_a();
    if a.len() < 2 {
        return Err(FkmcError::AllBlownUp(batch.samples.len()));
    }
    let e: Vec<f64> = a.iter().map(|v| p * a_t * (v - t * lambda_ref) / b_t).collect();
    let ess = ess_of(&e);
    Ok(MdpEstimate {
        value: log_mean_exp(&e) / a_t,
        ess,
        low_confidence: ess < MIN_ESS,
        a_t,
        b_t,
    })
}

/// `e^{−t λ_ref} E^{x0}[e^{pA_t}]` for each starting point, with common random numbers.
#[allow(clippy::too_many_arguments)]
pub fn mult_ergodic_profile(
    model: &SdeModel,
    p: f64,
    t: f64,
    x0_grid: &[f64],
    n_paths: usize,
    n_steps: usize,
    policy: &RngPolicy,
    lambda_ref: f64,
) -> Result<Vec<ProfilePoint>, FkmcError> {
    validate(t, n_paths, n_steps)?;
    x0_grid
        .iter()
        .map(|&x0| {
            let batch = simulate_batch(model, [x0, 0.0, 0.0], t, n_steps, n_paths, policy);
            let a = batch.valid_a();
            if a.is_empty() {
                return Err(FkmcError::AllBlownUp(batch.samples.len()));
            }
            let e: Vec<f64> = a.iter().map(|v| p * v).collect();
            Ok(ProfilePoint {
                x0,
                value: (log_mean_exp(&e) - t * lambda_ref).exp(),
                ess: ess_of(&e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelSpec};
    use proptest::prelude::*;

    fn ou() -> SdeModel {
        build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap()
    }

    #[test]
    fn zero_p_is_zero_and_moments() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let (l, d, d2, _, ess) = estimate_from_values(&a, 0.0, 2.0).unwrap();
        assert_eq!(l, 0.0);
        assert!((d - 3.5 / 2.0).abs() < 1e-15);
        // population variance of the weighted (uniform) sample
        assert!((d2 - 5.25 / 2.0).abs() < 1e-14);
        assert!((ess - 4.0).abs() < 1e-12);
    }

    #[test]
    fn p_zero_on_simulated_batch() {
        let e = estimate_lambda(&ou(), 0.0, 1.0, [0.0; 3], 100, 20, &RngPolicy::new(1)).unwrap();
        assert_eq!(e.lambda_t, 0.0);
        assert!(!e.near_critical);
    }

    #[test]
    fn near_critical_flag() {
        let e = estimate_lambda(&ou(), 0.46, 1.0, [0.0; 3], 10, 10, &RngPolicy::new(1)).unwrap();
        assert!(e.near_critical);
    }

    #[test]
    fn too_few_paths() {
        assert!(estimate_lambda(&ou(), 0.1, 1.0, [0.0; 3], 1, 10, &RngPolicy::new(1)).is_err());
    }

    #[test]
    fn single_point_curve() {
        let c = lambda_curve(&ou(), &[0.0], 1.0, [0.0; 3], 50, 10, &RngPolicy::new(3)).unwrap();
        assert_eq!(c.estimates.len(), 1);
        assert_eq!(c.estimates[0].lambda_t, 0.0);
        assert_eq!(c.max_convexity_violation, 0.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 1000;
        let z: Vec<f64> = (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        assert!((ks_normal(&z, 1.0) - 0.5 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn convexity_of_chords() {
        assert_eq!(convexity_violation(&[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]), 0.0);
        assert!((convexity_violation(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn translation_is_exact(
            a in prop::collection::vec(-5.0f64..5.0, 2..50),
            p in -2.0f64..2.0,
            c in -10.0f64..10.0,
        ) {
            let t = 3.0;
            let shifted: Vec<f64> = a.iter().map(|v| v + c).collect();
            let (l0, ..) = estimate_from_values(&a, p, t).unwrap();
            let (l1, ..) = estimate_from_values(&shifted, p, t).unwrap();
            prop_assert!((l1 - l0 - p * c / t).abs() < 1e-12);
        }

        #[test]
        fn ess_bounded_by_count(a in prop::collection::vec(-5.0f64..5.0, 2..50), p in -2.0f64..2.0) {
            let (.., ess) = estimate_from_values(&a, p, 1.0).unwrap();
            prop_assert!(ess <= a.len() as f64 * (1.0 + 1e-12));
            prop_assert!(ess >= 1.0 - 1e-12);
        }

        #[test]
        fn derivative_within_secant(a in prop::collection::vec(-3.0f64..3.0, 2..60), p in -1.0f64..1.0) {
            let h = 0.01;
            let t = 2.0;
            let (lm, ..) = estimate_from_values(&a, p - h, t).unwrap();
            let (lp, ..) = estimate_from_values(&a, p + h, t).unwrap();
            let (_, d, d2, ..) = estimate_from_values(&a, p, t).unwrap();
            let secant = (lp - lm) / (2.0 * h);
            // Λ_t is convex in p, so the exact derivative lies between the one-sided slopes
            let (l0, ..) = estimate_from_values(&a, p, t).unwrap();
            let left = (l0 - lm) / h;
            let right = (lp - l0) / h;
            prop_assert!(d >= left - 1e-9 && d <= right + 1e-9);
            prop_assert!((d - secant).abs() <= 0.5 * h * (right - left).abs() / h + 1e-6);
            prop_assert!(d2 >= 0.0);
        }
    }
}
