//! Large-p constants of `Λ(p)/p^e` for the pitchfork family.

use serde::Serialize;

use super::growth::upper_bound;
use super::lower::lower_bound;
use super::weight::WeightFamily;
use crate::error::BoundsError;
use crate::model::{build_model, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Scenario {
    /// `Q = x²`.
    Q2,
    /// `Q = x⁴`.
    Q4,
    /// `A_t = ∫ x dW` correlated with the driving noise by `ρ`.
    ItoX { rho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LimitConstant {
    Value(f64),
    /// Only bracketed: `lim inf ≥ lo`, `lim sup ≤ hi`.
    Interval(f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub p: f64,
    pub upper: f64,
    pub lower: f64,
    pub upper_scaled: f64,
    pub lower_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    pub scenario: Scenario,
    pub exponent: f64,
    pub limit: LimitConstant,
    pub ladder: Vec<LadderRow>,
    /// Scaled bounds at the largest `p` of the ladder.
    pub constant_upper: f64,
    pub constant_lower: f64,
    /// `upper_scaled − lower_scaled` decreases along the ladder.
    pub gap_shrinks: bool,
}

/// Pitchfork drift parameters `a x − b x³` and noise `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PitchforkParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

/// Limiting constant and exponent of `Λ(p)/p^e` as `p → ∞`.
pub fn limit_constant(scenario: Scenario, prm: PitchforkParams) -> (f64, LimitConstant) {
    let PitchforkParams { a, b, sigma } = prm;
    match scenario {
        Scenario::Q2 => (1.5, LimitConstant::Value((2.0f64 / 3.0).powf(1.5) * sigma / b)),
        Scenario::Q4 => (3.0, LimitConstant::Value(16.0 * sigma.powi(4) / (27.0 * b.powi(4)))),
        Scenario::ItoX { rho: -1.0 } => {
            let c = a.max(0.0).powi(2) / (4.0 * b * sigma);
            (1.0, LimitConstant::Interval(c - 0.5 * sigma, c + 0.5 * sigma))
        }
        Scenario::ItoX { rho } => {
            let s = (3.0 + rho * rho).sqrt();
            (3.0, LimitConstant::Value((s + 2.0 * rho).powi(2) * (s - rho) * sigma / (27.0 * b)))
        }
    }
}

/// Sweeps both bounds over `ladder` and scales them by `p^e`.
pub fn asymptotic_constants(
    scenario: Scenario,
    prm: PitchforkParams,
    ladder: &[f64],
) -> Result<AsymptoticReport, BoundsError> {
    if let Scenario::ItoX { rho } = scenario {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(crate::error::ModelError::RhoOutOfRange(rho).into());
        }
    }
    if ladder.is_empty() || ladder.iter().any(|&p| !(p > 0.0)) {
        return Err(BoundsError::Invalid("ladder needs positive p values".into()));
    }
    let PitchforkParams { a, b, sigma } = prm;
    let spec = match scenario {
        Scenario::Q2 => ModelSpec::PitchforkQ2 { a, b, sigma },
        Scenario::Q4 => ModelSpec::PitchforkQ4 { a, b, sigma },
        Scenario::ItoX { rho } => ModelSpec::PitchforkCorr { a, b, sigma, rho },
    };
    let model = build_model(&spec)?;
    let (exponent, limit) = limit_constant(scenario, prm);
    let ladder = ladder
        .iter()
        .map(|&p| {
            let upper = upper_bound(&model, p, WeightFamily::ExpQuadratic)?.value;
            let lower = lower_bound(&model, p, None)?.value;
            let s = p.powf(exponent);
            Ok(LadderRow {
                p,
                upper,
                lower,
                upper_scaled: upper / s,
                lower_scaled: lower / s,
            })
        })
        .collect::<Result<Vec<_>, BoundsError>>()?;
    let last = ladder.last().expect("non-empty ladder");
    let gap_shrinks = ladder.windows(2).all(|w| {
        w[1].upper_scaled - w[1].lower_scaled < w[0].upper_scaled - w[0].lower_scaled
    });
    Ok(AsymptoticReport {
        scenario,
        exponent,
        limit,
        constant_upper: last.upper_scaled,
        constant_lower: last.lower_scaled,
        gap_shrinks,
        ladder,
    })
}
