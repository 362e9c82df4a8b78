//! Quantities derived from `Λ`: the almost-sure exponent, `Λ''(0)`, the rate
//! function, and Poisson-equation checks.

use serde::Serialize;

use crate::error::AnalysisError;
use crate::field::{Poly, ScalarField};
use crate::fkmc::convexity_violation;
use crate::model::{SdeModel, StateSpace};

/// Default number of quadrature nodes.
pub const DENSITY_NODES: usize = 8001;

/// Log-density drop that defines the quadrature window.
const TAIL_DROP: f64 = 60.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryDensity1D {
    pub nodes: Vec<f64>,
    pub density: Vec<f64>,
    /// `|∫ρ − 1|` by the trapezoid rule after normalization.
    pub normalization_residual: f64,
}

impl StationaryDensity1D {
    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// Trapezoid rule for `∫ f ρ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.nodes.len();
        let h = self.spacing();
        self.nodes
            .iter()
            .zip(&self.density)
            .enumerate()
            .map(|(i, (&x, &r))| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * f(x) * r
            })
            .sum::<f64>()
            * h
    }

    /// Distribution function by cumulative trapezoid and linear interpolation.
    pub fn cdf(&self) -> impl Fn(f64) -> f64 + '_ {
        let h = self.spacing();
        let mut cum = vec![0.0; self.nodes.len()];
        for i in 1..cum.len() {
            cum[i] = cum[i - 1] + 0.5 * h * (self.density[i - 1] + self.density[i]);
        }
        move |x: f64| {
            let x0 = self.nodes[0];
            if x <= x0 {
                return 0.0;
            }
            let t = (x - x0) / h;
            let i = t.floor() as usize;
            if i + 1 >= cum.len() {
                return 1.0;
            }
            let f = t - i as f64;
            cum[i] + f * (cum[i + 1] - cum[i])
        }
    }
}

/// `log` of the unnormalized density `exp(∫ 2b/a) / a`.
fn log_density(b: &ScalarField, a: &ScalarField) -> Result<Box<dyn Fn(f64) -> f64>, AnalysisError> {
    match (a, b.as_poly()) {
        (ScalarField::Constant(a), Some(b)) => {
            let s = b.antiderivative().scale(2.0 / a);
            let la = a.ln();
            Ok(Box::new(move |x| s.eval(x) - la))
        }
        (ScalarField::Polynomial(ap), Some(bp)) => {
            let (ap, bp) = (ap.clone(), bp.clone());
            // composite Simpson from 0 to x on 64 panels
            Ok(Box::new(move |x: f64| {
                let f = |y: f64| 2.0 * bp.eval(y) / ap.eval(y);
                let m = 64;
                let h = x / m as f64;
                let mut s = f(0.0) + f(x);
                for k in 1..m {
                    s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
                }
                s * h / 3.0 - ap.eval(x).ln()
            }))
        }
        _ => Err(AnalysisError::Invalid("stationary density needs polynomial coefficients".into())),
    }
}

/// Stationary density of a line model, normalized by the trapezoid rule.
pub fn stationary_density(model: &SdeModel) -> Result<StationaryDensity1D, AnalysisError> {
    stationary_density_on(model, DENSITY_NODES)
}

pub fn stationary_density_on(model: &SdeModel, n: usize) -> Result<StationaryDensity1D, AnalysisError> {
    if model.state_space() != StateSpace::Line {
        return Err(AnalysisError::Invalid(format!("{} is not a line model", model.label())));
    }
    let f = model.line_fields()?;
    let a_diff = ScalarField::sum(
        f.noise
            .iter()
            .map(|n| n.mul(n))
            .collect::<Result<Vec<_>, _>>()?
            .iter(),
    )?;
    if a_diff.is_zero() {
        return Err(AnalysisError::Invalid("diffusion vanishes".into()));
    }
    let logd = log_density(&f.ito_drift, &a_diff)?;
    // window: both tails must fall TAIL_DROP below the log density at the origin
    let top = logd(0.0);
    let mut x_max = 1.0;
    loop {
        let ok = |x: f64| {
            let v = logd(x);
            v.is_finite() && v < top - TAIL_DROP
        };
        if ok(x_max) && ok(-x_max) {
            break;
        }
        x_max *= 1.25;
        if x_max > 1e3 {
            return Err(AnalysisError::NotNormalizable(format!(
                "log density does not decay by {TAIL_DROP} within |x| ≤ 1000"
            )));
        }
    }
    let n = n.max(3);
    let h = 2.0 * x_max / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| -x_max + i as f64 * h).collect();
    for &x in &nodes {
        if !(a_diff.eval(x) > 0.0) {
            return Err(AnalysisError::Invalid(format!("diffusion vanishes at x = {x}")));
        }
    }
    let logs: Vec<f64> = nodes.iter().map(|&x| logd(x)).collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut density: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let trap = |d: &[f64]| h * (d.iter().sum::<f64>() - 0.5 * (d[0] + d[n - 1]));
    let z = trap(&density);
    if !(z.is_finite() && z > 0.0) {
        return Err(AnalysisError::NotNormalizable("zero or infinite mass".into()));
    }
    density.iter_mut().for_each(|d| *d /= z);
    let normalization_residual = (trap(&density) - 1.0).abs();
    Ok(StationaryDensity1D {
        nodes,
        density,
        normalization_residual,
    })
}

/// Almost-sure exponent `λ = ∫ Q dν`.
pub fn lambda_as(model: &SdeModel) -> Result<f64, AnalysisError> {
    let d = stationary_density(model)?;
    let q = &model.line_fields()?.q_ito;
    Ok(d.integrate(|x| q.eval(x)))
}

fn stencil_step(samples: &[(f64, f64)], len: usize) -> Result<f64, AnalysisError> {
    if samples.len() != len {
        return Err(AnalysisError::AsymmetricStencil(format!(
            "expected {len} samples, got {}",
            samples.len()
        )));
    }
    let mid = len / 2;
    let h = samples[mid + 1].0 - samples[mid].0;
    if !(h > 0.0) {
        return Err(AnalysisError::AsymmetricStencil("p values must increase".into()));
    }
    for (i, &(p, _)) in samples.iter().enumerate() {
        let want = (i as f64 - mid as f64) * h;
        if (p - want).abs() > 1e-9 * h {
            return Err(AnalysisError::AsymmetricStencil(format!(
                "sample {i} at p = {p}, expected {want}"
            )));
        }
    }
    Ok(h)
}

/// Fourth-order centered second difference on the stencil `p = −2h, −h, 0, h, 2h`.
pub fn second_derivative_at_zero(samples: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    let h = stencil_step(samples, 5)?;
    let f: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok((-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h))
}

/// Centered first difference on `p = −h, 0, h`.
pub fn first_derivative_at_zero(samples: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    let h = stencil_step(samples, 3)?;
    Ok((samples[2].1 - samples[0].1) / (2.0 * h))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub s: f64,
    pub i: f64,
    pub argmax_p: f64,
    /// The supremum sits at the edge of the sampled p range.
    pub boundary_limited: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFunctionTable {
    pub rows: Vec<RateRow>,
    pub samples: Vec<(f64, f64)>,
}

impl RateFunctionTable {
    /// Row with the given `s` (exact match).
    pub fn at(&self, s: f64) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.s == s)
    }
}

/// Discrete Legendre transform `I(s) = sup_p (ps − Λ(p))` with parabolic refinement.
///
/// `tol` is the accuracy of the samples; convexity violations beyond `3·tol` are rejected.
pub fn legendre(samples: &[(f64, f64)], s_grid: &[f64], tol: f64) -> Result<RateFunctionTable, AnalysisError> {
    if samples.len() < 3 {
        return Err(AnalysisError::Invalid("need at least 3 samples".into()));
    }
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(AnalysisError::Invalid("p samples must increase".into()));
    }
    for w in samples.windows(3) {
        let v = convexity_violation(w);
        if v > 3.0 * tol {
            return Err(AnalysisError::NonConvex { p: w[1].0, violation: v });
        }
    }
    let rows = s_grid
        .iter()
        .map(|&s| {
            let g: Vec<f64> = samples.iter().map(|&(p, l)| p * s - l).collect();
            let j = g
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(j, _)| j)
                .unwrap();
            if j == 0 || j == g.len() - 1 {
                return RateRow {
                    s,
                    i: g[j],
                    argmax_p: samples[j].0,
                    boundary_limited: true,
                };
            }
            let (x0, x1, x2) = (samples[j - 1].0, samples[j].0, samples[j + 1].0);
            let (y0, y1, y2) = (g[j - 1], g[j], g[j + 1]);
            // vertex of the parabola through the three points
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            let c2 = (d12 - d01) / (x2 - x0);
            let (argmax_p, i) = if c2 < 0.0 {
                let xv = 0.5 * (x0 + x1) - d01 / (2.0 * c2);
                let xv = xv.clamp(x0, x2);
                (xv, y1 + d01 * (xv - x1) + c2 * (xv - x0) * (xv - x1))
            } else {
                (x1, y1)
            };
            RateRow {
                s,
                i: i.max(y1),
                argmax_p,
                boundary_limited: false,
            }
        })
        .collect();
    Ok(RateFunctionTable {
        rows,
        samples: samples.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonReport {
    /// `sup |Q + LΦ₁ − λ_ref|` on the grid.
    pub residual: f64,
    /// `sup |q_j + X_j Φ₁'|` per channel.
    pub channel_residuals: Vec<f64>,
}

/// `Q + LΦ₁ − λ_ref` and `q_j + X_jΦ₁'` as exact fields.
fn poisson_fields(model: &SdeModel, phi1: &ScalarField, lambda_ref: f64) -> Result<(ScalarField, Vec<ScalarField>), AnalysisError> {
    let f = model.line_fields()?;
    let d1 = phi1.derivative();
    let d2 = d1.derivative();
    let mut lphi = f.ito_drift.mul(&d1)?;
    for n in &f.noise {
        lphi = lphi.add(&n.mul(n)?.mul(&d2)?.scale(0.5))?;
    }
    let defect = f.q_ito.add(&lphi)?.add(&ScalarField::Constant(-lambda_ref))?;
    let channels = f
        .noise
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let qj = f.q.get(j).cloned().unwrap_or_else(ScalarField::zero);
            qj.add(&n.mul(&d1)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((defect, channels))
}

pub fn poisson_residual(
    model: &SdeModel,
    phi1: &ScalarField,
    lambda_ref: f64,
    grid: &[f64],
) -> Result<PoissonReport, AnalysisError> {
    let (defect, channels) = poisson_fields(model, phi1, lambda_ref)?;
    let sup = |g: &ScalarField| grid.iter().map(|&x| g.eval(x).abs()).fold(0.0, f64::max);
    Ok(PoissonReport {
        residual: sup(&defect),
        channel_residuals: channels.iter().map(sup).collect(),
    })
}

/// `Σ_j ∫ (q_j + X_jΦ₁')² dν`, which equals `Λ''(0)` when `Φ₁` solves the Poisson equation.
pub fn variance_identity(model: &SdeModel, phi1: &ScalarField) -> Result<f64, AnalysisError> {
    let d = stationary_density(model)?;
    let (_, channels) = poisson_fields(model, phi1, 0.0)?;
    Ok(channels
        .iter()
        .map(|c| d.integrate(|x| c.eval(x).powi(2)))
        .sum())
}

/// `Φ₁ = x²/(2a)` for the OU model with `Q = x²`.
pub fn ou_poisson_solution(a: f64) -> ScalarField {
    ScalarField::Polynomial(Poly::monomial(0.5 / a, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelSpec};

    fn ou(a: f64, sigma: f64) -> SdeModel {
        build_model(&ModelSpec::OuQuadratic { a, sigma }).unwrap()
    }

    fn ou_closed(p: f64) -> f64 {
        0.5 * (1.0 - (1.0 - 2.0 * p).sqrt())
    }

    #[test]
    fn ou_density_is_gaussian() {
        let d = stationary_density(&ou(1.0, 1.0)).unwrap();
        let pi = std::f64::consts::PI;
        for (&x, &r) in d.nodes.iter().zip(&d.density) {
            assert!((r - (-x * x).exp() / pi.sqrt()).abs() < 1e-6);
        }
        assert!(d.normalization_residual < 1e-8);
        assert!(d.density.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn symmetric_drift_gives_even_density() {
        let m = build_model(&ModelSpec::PitchforkQ2 { a: 1.0, b: 1.0, sigma: 0.8 }).unwrap();
        let d = stationary_density(&m).unwrap();
        let n = d.density.len();
        for i in 0..n / 2 {
            assert!((d.density[i] - d.density[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn non_normalizable() {
        let m = build_model(&ModelSpec::Custom {
            state_space: StateSpace::Line,
            drift: ScalarField::poly(&[0.0, 0.5]),
            noise: vec![ScalarField::Constant(1.0)],
            q0: ScalarField::zero(),
            q: vec![],
        })
        .unwrap();
        assert!(matches!(stationary_density(&m), Err(AnalysisError::NotNormalizable(_))));
    }

    #[test]
    fn almost_sure_exponents() {
        assert!((lambda_as(&ou(1.0, 1.0)).unwrap() - 0.5).abs() < 1e-10);
        assert!((lambda_as(&ou(2.0, 0.5)).unwrap() - 0.25 / 4.0).abs() < 1e-10);
        let deg = build_model(&ModelSpec::OuLinearDegenerate { a: 1.0, sigma: 1.0 }).unwrap();
        assert!(lambda_as(&deg).unwrap().abs() < 1e-12);
    }

    #[test]
    fn stencils() {
        let h = 0.05;
        let s: Vec<(f64, f64)> = (-2..=2).map(|k| k as f64 * h).map(|p| (p, ou_closed(p))).collect();
        assert!((second_derivative_at_zero(&s).unwrap() - 0.5).abs() < 1e-4);
        let bad = vec![(-0.1, 0.0), (-0.05, 0.0), (0.0, 0.0), (0.04, 0.0), (0.1, 0.0)];
        assert!(matches!(second_derivative_at_zero(&bad), Err(AnalysisError::AsymmetricStencil(_))));
        let s3: Vec<(f64, f64)> = [-0.01, 0.0, 0.01].iter().map(|&p| (p, ou_closed(p))).collect();
        assert!((first_derivative_at_zero(&s3).unwrap() - 0.5).abs() < 1e-4);
        let iso: Vec<(f64, f64)> = (-2..=2).map(|k| k as f64 * 0.1).map(|p| (p, 0.5 * p * p * 0.49)).collect();
        assert!((second_derivative_at_zero(&iso).unwrap() - 0.49).abs() < 1e-12);
    }

    #[test]
    fn ou_rate_function() {
        let samples: Vec<(f64, f64)> = (0..=490).map(|k| -2.0 + k as f64 * 0.005).map(|p| (p, ou_closed(p))).collect();
        let t = legendre(&samples, &[0.5, 1.0, 40.0], 1e-12).unwrap();
        let r1 = t.at(1.0).unwrap();
        assert!((r1.i - 0.125).abs() < 1e-6);
        assert!((r1.argmax_p - 0.375).abs() < 1e-3);
        assert!(t.at(0.5).unwrap().i.abs() < 1e-9);
        assert!(t.at(40.0).unwrap().boundary_limited);
    }

    #[test]
    fn linear_rate_function() {
        let samples: Vec<(f64, f64)> = (-10..=10).map(|k| (k as f64 * 0.1, 0.0)).collect();
        let t = legendre(&samples, &[0.0, 0.3], 1e-12).unwrap();
        assert_eq!(t.at(0.0).unwrap().i, 0.0);
        assert!(t.at(0.3).unwrap().boundary_limited);
    }

    #[test]
    fn non_convex_is_rejected() {
        let samples = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)];
        assert!(matches!(legendre(&samples, &[0.5], 1e-6), Err(AnalysisError::NonConvex { .. })));
    }

    #[test]
    fn poisson_checks() {
        let grid: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.1).collect();
        let deg = build_model(&ModelSpec::OuLinearDegenerate { a: 1.0, sigma: 1.0 }).unwrap();
        let r = poisson_residual(&deg, &ScalarField::poly(&[0.0, 1.0]), 0.0, &grid).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.channel_residuals, vec![0.0]);

        let m = ou(1.0, 1.0);
        let phi = ScalarField::poly(&[-0.3, 0.0, 0.5]);
        assert!(poisson_residual(&m, &phi, 0.5, &grid).unwrap().residual < 1e-15);
        let zero = poisson_residual(&m, &ScalarField::zero(), 0.0, &grid).unwrap();
        // Q + LΦ₁ − λ with Φ₁ = 0 and λ = 0 is x²
        assert!((zero.residual - 16.0).abs() < 1e-12);
        let half = poisson_residual(&m, &ScalarField::zero(), 0.5, &grid).unwrap();
        assert!((half.residual - 15.5).abs() < 1e-12);
    }

    #[test]
    fn variance_identities() {
        let v = variance_identity(&ou(1.0, 1.0), &ou_poisson_solution(1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-4);
        let (a, s) = (1.5, 0.7);
        let v = variance_identity(&ou(a, s), &ou_poisson_solution(a)).unwrap();
        assert!((v - s.powi(4) / (2.0 * a.powi(3))).abs() < 1e-4);
        let deg = build_model(&ModelSpec::OuLinearDegenerate { a: 1.0, sigma: 1.0 }).unwrap();
        assert!(variance_identity(&deg, &ScalarField::poly(&[0.0, 1.0])).unwrap().abs() < 1e-12);
    }
}
