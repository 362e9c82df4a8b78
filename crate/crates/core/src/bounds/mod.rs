//! Growth-condition audits and analytic bounds on `Λ(p)`.

mod asymptotics;
mod growth;
mod lower;
mod weight;

use serde::Serialize;

pub use asymptotics::{
    asymptotic_constants, limit_constant, AsymptoticReport, LadderRow, LimitConstant, PitchforkParams, Scenario,
};
pub use growth::{
    admissible_parameters, check_growth, default_param_grid, find_admissible, growth_ratio, log_grid, scan_grid,
    upper_bound, ConditionVerdict, GrowthRatio, GrowthReport, UpperBound, BETA_MENU,
};
pub use lower::{default_a_grid, lower_bound, lower_bound_at, LowerBound};
pub use weight::{LyapunovWeight, WeightFamily};

use crate::error::BoundsError;
use crate::model::SdeModel;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub p: f64,
    pub upper: Option<UpperBound>,
    pub lower: Option<LowerBound>,
    /// `lower ≤ upper` whenever both exist.
    pub sandwich_ok: bool,
}

/// Upper bound from `family` and, for pitchfork models, the lower bound.
pub fn bounds_report(
    model: &SdeModel,
    p: f64,
    family: WeightFamily,
    a_grid: Option<&[f64]>,
) -> Result<BoundsReport, BoundsError> {
    let upper = match upper_bound(model, p, family) {
        Ok(u) => Some(u),
        Err(BoundsError::NoAdmissibleParameter { .. }) => None,
        Err(e) => return Err(e),
    };
    let lower = match lower_bound(model, p, a_grid) {
        Ok(l) => Some(l),
        Err(BoundsError::NoAdmissibleParameter { .. } | BoundsError::UnsupportedModel(_)) => None,
        Err(e) => return Err(e),
    };
    let sandwich_ok = match (&upper, &lower) {
        (Some(u), Some(l)) => l.value <= u.value,
        _ => true,
    };
    Ok(BoundsReport {
        p,
        upper,
        lower,
        sandwich_ok,
    })
}
