//! Sub-eigenfunction lower bounds with test functions `g = (x²)^A`.

use serde::Serialize;

use super::growth::log_grid;
use crate::error::BoundsError;
use crate::field::Poly;
use crate::model::{ModelSpec, SdeModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub a_star: f64,
}

/// `inf_x L_p g / g` for `g = (x²)^A`, or `None` where it is `−∞`.
///
/// With `K = σ²A(2A − 1)` and `y = x²` the quotient is `K/y + c₀ + c₁y + c₂y²`.
pub fn lower_bound_at(model: &SdeModel, p: f64, big_a: f64) -> Result<Option<f64>, BoundsError> {
    let (a, b, sigma, c1_extra, c2, c0_extra) = match *model.spec() {
        ModelSpec::PitchforkQ2 { a, b, sigma } => (a, b, sigma, p, 0.0, 0.0),
        ModelSpec::PitchforkQ4 { a, b, sigma } => (a, b, sigma, 0.0, p, 0.0),
        ModelSpec::PitchforkCorr { a, b, sigma, rho } => {
            (a, b, sigma, 0.5 * p * p, 0.0, 2.0 * big_a * rho * p * sigma)
        }
        _ => return Err(BoundsError::UnsupportedModel(model.label().to_string())),
    };
    if !(big_a >= 0.5) {
        return Ok(None);
    }
    let k = sigma * sigma * big_a * (2.0 * big_a - 1.0);
    let c0 = 2.0 * big_a * a + c0_extra;
    let c1 = c1_extra - 2.0 * big_a * b;
    if c2 == 0.0 {
        if c1 < 0.0 || (c1 == 0.0 && k > 0.0) {
            // c1 < 0 sends the quotient to −∞; c1 = 0 leaves an infimum of c0 at infinity
            return Ok((c1 == 0.0).then_some(c0));
        }
        return Ok(Some(c0 + 2.0 * (c1 * k).sqrt()));
    }
    if c2 < 0.0 {
        return Ok(None);
    }
    // stationary points: 2c₂y³ + c₁y² − K = 0
    let h = |y: f64| k / y + c0 + c1 * y + c2 * y * y;
    let cubic = Poly::new(vec![-k, 0.0, c1, 2.0 * c2]);
    let best = cubic
        .real_roots()
        .into_iter()
        .filter(|&y| y > 0.0)
        .map(h)
        .fold(f64::INFINITY, f64::min);
    Ok(Some(if best.is_finite() { best } else { c0.min(h(f64::MIN_POSITIVE.sqrt())) }))
}

/// Exponents worth searching: `A > 1` up to where the bound stops existing or peaks.
pub fn default_a_grid(model: &SdeModel, p: f64) -> Result<Vec<f64>, BoundsError> {
    let hi = match *model.spec() {
        ModelSpec::PitchforkQ2 { b, .. } => p / (2.0 * b),
        ModelSpec::PitchforkCorr { b, .. } => p * p / (4.0 * b),
        ModelSpec::PitchforkQ4 { b, sigma, .. } => 4.0 * (sigma * sigma * p * p / b.powi(3)).max(1.0),
        _ => return Err(BoundsError::UnsupportedModel(model.label().to_string())),
    };
    if !(hi > 1.0) {
        return Ok(Vec::new());
    }
    Ok(log_grid(1.0 + 1e-9, hi, 4001))
}

/// `Γ̃* = max_A inf_x L_p g_A / g_A` over `a_grid` (default grid when `None`),
/// refined by golden section around the best grid point.
pub fn lower_bound(model: &SdeModel, p: f64, a_grid: Option<&[f64]>) -> Result<LowerBound, BoundsError> {
    let grid = match a_grid {
        Some(g) => g.to_vec(),
        None => default_a_grid(model, p)?,
    };
    let f = |a: f64| -> Result<f64, BoundsError> {
        Ok(lower_bound_at(model, p, a)?.unwrap_or(f64::NEG_INFINITY))
    };
    let vals = grid.iter().map(|&a| f(a)).collect::<Result<Vec<_>, _>>()?;
    let best = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1));
    let Some((i, &v)) = best else {
        return Err(BoundsError::NoAdmissibleParameter {
            family: "(x^2)^A".into(),
            p,
        });
    };
    if a_grid.is_some() {
        return Ok(LowerBound { value: v, a_star: grid[i] });
    }
    let (mut lo, mut hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..100 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d)?;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    let (a_star, value) = [(grid[i], v), (c, fc), (d, fd)]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    Ok(LowerBound { value, a_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use proptest::prelude::*;

    fn q2() -> SdeModel {
        build_model(&ModelSpec::PitchforkQ2 { a: 0.0, b: 1.0, sigma: 1.0 }).unwrap()
    }

    #[test]
    fn q2_at_ten_thirds() {
        let v = lower_bound_at(&q2(), 10.0, 10.0 / 3.0).unwrap().unwrap();
        // 2√(p − 2A) √(A(2A − 1))
        let a: f64 = 10.0 / 3.0;
        let want = 2.0 * (10.0 - 2.0 * a).sqrt() * (a * (2.0 * a - 1.0)).sqrt();
        assert!((v - want).abs() < 1e-12);
        assert!((v - 15.87).abs() < 5e-3);
    }

    #[test]
    fn q2_maximum() {
        let lb = lower_bound(&q2(), 10.0, None).unwrap();
        assert!(lb.value >= 15.87);
        assert!(lb.value < 16.0);
        assert!(lb.a_star > 1.0 && lb.a_star < 5.0);
    }

    #[test]
    fn half_exponent_limit() {
        let m = build_model(&ModelSpec::PitchforkQ2 { a: 0.8, b: 1.0, sigma: 1.0 }).unwrap();
        let v = lower_bound_at(&m, 5.0, 0.5).unwrap().unwrap();
        assert!((v - 0.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_exponent() {
        assert_eq!(lower_bound_at(&q2(), 1.0, 2.0).unwrap(), None);
        assert!(lower_bound(&q2(), 1.5, None).is_err());
    }

    #[test]
    fn q4_scaling() {
        let (b, sigma) = (1.0, 1.0);
        let m = build_model(&ModelSpec::PitchforkQ4 { a: 0.0, b, sigma }).unwrap();
        let target = 16.0 * sigma.powi(4) / (27.0 * b.powi(4));
        let c = 8.0 * sigma * sigma / (9.0 * b.powi(3));
        let p = 1e3;
        let v = lower_bound_at(&m, p, c * p * p).unwrap().unwrap();
        assert!((v / p.powi(3) - target).abs() < 1e-2 * target);
    }

    #[test]
    fn unsupported_model() {
        let m = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
        assert!(matches!(lower_bound(&m, 1.0, None), Err(BoundsError::UnsupportedModel(_))));
    }

    proptest! {
        #[test]
        fn closed_form_matches_brute_force(
            a in -1.0f64..1.0, p in 0.5f64..20.0, big_a in 1.0f64..6.0, kind in 0usize..3, rho in -1.0f64..1.0,
        ) {
            let spec = match kind {
                0 => ModelSpec::PitchforkQ2 { a, b: 1.0, sigma: 0.8 },
                1 => ModelSpec::PitchforkQ4 { a, b: 1.0, sigma: 0.8 },
                _ => ModelSpec::PitchforkCorr { a, b: 1.0, sigma: 0.8, rho },
            };
            let m = build_model(&spec).unwrap();
            let tc = crate::model::twisted_coefficients(&m, p).unwrap();
            let quotient = |x: f64| {
                let k = big_a * (2.0 * big_a - 1.0) / (x * x);
                0.5 * tc.a_diff.eval(x) * 2.0 * k + tc.b_drift.eval(x) * 2.0 * big_a / x + tc.potential.eval(x)
            };
            let brute = log_grid(1e-3, 1e3, 200_001)
                .into_iter()
                .map(quotient)
                .fold(f64::INFINITY, f64::min);
            if let Some(v) = lower_bound_at(&m, p, big_a).unwrap() {
                prop_assert!(v <= brute + 1e-9 * (1.0 + brute.abs()));
                prop_assert!(brute - v < 1e-3 * (1.0 + v.abs()));
            }
        }
    }
}
