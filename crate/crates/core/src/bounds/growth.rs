//! Exact growth ratios `L_pV/V` and the conditions built from them.

use serde::Serialize;

use super::weight::{LyapunovWeight, WeightFamily};
use crate::error::BoundsError;
use crate::field::{Poly, ScalarField};
use crate::model::{twisted_coefficients, SdeModel, StateSpace};

/// Strengthening factors tried for conditions (2) and (3), in order.
pub const BETA_MENU: [f64; 4] = [1.1, 1.25, 1.5, 2.0];

/// Further factors `1 + 0.1·2^{-k}` tried once the menu fails.
const BETA_REFINEMENTS: u32 = 24;

/// `N(x) / (1 + x²)^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRatio {
    pub num: Poly,
    pub den_pow: u32,
}

impl GrowthRatio {
    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / (1.0 + x * x).powi(self.den_pow as i32)
    }

    /// Degree excess of the numerator over the denominator and its leading coefficient.
    pub fn excess(&self) -> Option<(i64, f64)> {
        self.num
            .leading_term()
            .map(|(d, c)| (d as i64 - 2 * self.den_pow as i64, c))
    }

    /// Tends to `−∞` in both directions.
    pub fn tends_to_neg_inf(&self) -> bool {
        matches!(self.excess(), Some((e, c)) if e > 0 && e % 2 == 0 && c < 0.0)
    }

    pub fn bounded_above(&self) -> bool {
        match self.excess() {
            None => true,
            Some((e, c)) => e <= 0 || (e % 2 == 0 && c < 0.0),
        }
    }

    /// Global supremum and a maximizer (`None` when approached only at infinity).
    pub fn sup(&self) -> (f64, Option<f64>) {
        if !self.bounded_above() {
            return (f64::INFINITY, None);
        }
        let k = self.den_pow as f64;
        // numerator of the derivative: N'(1 + x²) − 2k x N
        let crit = if self.den_pow == 0 {
            self.num.derivative()
        } else {
            self.num
                .derivative()
                .mul(&Poly::new(vec![1.0, 0.0, 1.0]))
                .sub(&self.num.mul(&Poly::monomial(2.0 * k, 1)))
        };
        let mut best = (self.eval(0.0), Some(0.0));
        for x in crit.real_roots() {
            let v = self.eval(x);
            if v > best.0 {
                best = (v, Some(x));
            }
        }
        if let Some((e, c)) = self.excess() {
            let limit = match e {
                0 => c,
                e if e < 0 => 0.0,
                _ => f64::NEG_INFINITY,
            };
            if limit > best.0 {
                best = (limit, None);
            }
        }
        best
    }
}

fn line_poly(f: &ScalarField, what: &str) -> Result<Poly, BoundsError> {
    f.as_poly()
        .ok_or_else(|| BoundsError::NonPolynomial(format!("{what} is not a polynomial")))
}

/// `L_pV/V` in closed form for a line model.
pub fn growth_ratio(model: &SdeModel, weight: &LyapunovWeight, p: f64) -> Result<GrowthRatio, BoundsError> {
    if model.state_space() != StateSpace::Line {
        return Err(BoundsError::NonPolynomial(format!(
            "{} does not live on the line",
            model.label()
        )));
    }
    let tc = twisted_coefficients(model, p)?;
    let a = line_poly(&tc.a_diff, "diffusion")?;
    let b = line_poly(&tc.b_drift, "drift")?;
    let pot = line_poly(&tc.potential, "potential")?;
    let half_a = a.scale(0.5);
    match weight.log_poly() {
        Some(u) => {
            let u1 = u.derivative();
            let u2 = u1.derivative();
            let num = half_a
                .mul(&u2.add(&u1.mul(&u1)))
                .add(&b.mul(&u1))
                .add(&pot);
            Ok(GrowthRatio { num, den_pow: 0 })
        }
        None => {
            debug_assert_eq!(weight.family, WeightFamily::Poly);
            let al = weight.param;
            let s = Poly::new(vec![1.0, 0.0, 1.0]);
            // (U'' + U'²)(1 + x²)² = 2α(1 − x²) + 4α²x²
            let curv = Poly::new(vec![2.0 * al, 0.0, 4.0 * al * al - 2.0 * al]);
            let num = half_a
                .mul(&curv)
                .add(&b.mul(&Poly::monomial(2.0 * al, 1)).mul(&s))
                .add(&pot.mul(&s).mul(&s));
            Ok(GrowthRatio { num, den_pow: 2 })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub pass: bool,
    /// Supremum of the ratio used by the condition (`+∞` when unbounded).
    pub sup: f64,
    /// Strengthening factor that made the condition pass.
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub p: f64,
    pub weight: LyapunovWeight,
    /// Supremum of `L_pV/V` over the scan nodes and the exact critical points.
    pub gamma_sup: f64,
    pub scan_sup: f64,
    /// Least-squares slope of `L_pV/V` against `|x|` on the outer 20% of the scan.
    pub tail_trend: f64,
    pub tail_excess: Option<(i64, f64)>,
    /// `LV/V` bounded above.
    pub cond0: ConditionVerdict,
    /// `L_pV/V → −∞`.
    pub cond1: bool,
    /// `L_{βp}V/V` bounded above for some `β > 1`.
    pub cond2: ConditionVerdict,
    /// `L_p(V^β)/V^β` bounded above for some `β > 1`.
    pub cond3: ConditionVerdict,
}

impl GrowthReport {
    pub fn admissible(&self) -> bool {
        self.cond0.pass && self.cond1 && self.cond2.pass && self.cond3.pass
    }
}

fn betas() -> impl Iterator<Item = f64> {
    BETA_MENU
        .into_iter()
        .chain((1..=BETA_REFINEMENTS).map(|k| 1.0 + 0.1 * 0.5f64.powi(k as i32)))
}

fn search_beta(
    ratio_for: impl Fn(f64) -> Result<GrowthRatio, BoundsError>,
) -> Result<ConditionVerdict, BoundsError> {
    for beta in betas() {
        let r = ratio_for(beta)?;
        if r.bounded_above() {
            return Ok(ConditionVerdict {
                pass: true,
                sup: r.sup().0,
                beta: Some(beta),
            });
        }
    }
    Ok(ConditionVerdict {
        pass: false,
        sup: f64::INFINITY,
        beta: None,
    })
}

fn tail_trend(ratio: &GrowthRatio, scan: &[f64]) -> f64 {
    let rmax = scan.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let pts: Vec<(f64, f64)> = scan
        .iter()
        .filter(|x| x.abs() >= 0.8 * rmax)
        .map(|&x| (x.abs(), ratio.eval(x)))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Symmetric scan grid with `n` nodes on `[−x_max, x_max]`.
pub fn scan_grid(x_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Audits conditions (0)–(3) for one weight at one `p`.
pub fn check_growth(
    model: &SdeModel,
    weight: &LyapunovWeight,
    p: f64,
    scan: &[f64],
) -> Result<GrowthReport, BoundsError> {
    let ratio = growth_ratio(model, weight, p)?;
    let scan_sup = scan
        .iter()
        .map(|&x| ratio.eval(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let gamma_sup = scan_sup.max(ratio.sup().0);
    let r0 = growth_ratio(model, weight, 0.0)?;
    let cond0 = ConditionVerdict {
        pass: r0.bounded_above(),
        sup: r0.sup().0,
        beta: None,
    };
    let cond2 = search_beta(|beta| growth_ratio(model, weight, beta * p))?;
    let cond3 = if weight.family == WeightFamily::Unit {
        ConditionVerdict {
            pass: ratio.bounded_above(),
            sup: ratio.sup().0,
            beta: Some(BETA_MENU[0]),
        }
    } else {
        search_beta(|beta| growth_ratio(model, &weight.power(beta), p))?
    };
    Ok(GrowthReport {
        p,
        weight: *weight,
        gamma_sup,
        scan_sup,
        tail_trend: tail_trend(&ratio, scan),
        tail_excess: ratio.excess(),
        cond0,
        cond1: ratio.tends_to_neg_inf(),
        cond2,
        cond3,
    })
}

/// Log-spaced parameter grid on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Default parameter grid for the admissibility search.
pub fn default_param_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 801)
}

/// Parameters of `family` on `grid` for which all of (0)–(3) hold at `p`.
pub fn admissible_parameters(
    model: &SdeModel,
    family: WeightFamily,
    p: f64,
    grid: &[f64],
) -> Result<Vec<f64>, BoundsError> {
    let scan = scan_grid(1.0, 3);
    let mut out = Vec::new();
    for &g in grid {
        if check_growth(model, &LyapunovWeight::new(family, g), p, &scan)?.admissible() {
            out.push(g);
        }
    }
    Ok(out)
}

/// Admissible weight of `family` at `p` with the smallest `sup L_pV/V`.
pub fn find_admissible(
    model: &SdeModel,
    family: WeightFamily,
    p: f64,
) -> Result<LyapunovWeight, BoundsError> {
    let mut best: Option<(f64, f64)> = None;
    for g in admissible_parameters(model, family, p, &default_param_grid())? {
        let s = growth_ratio(model, &LyapunovWeight::new(family, g), p)?.sup().0;
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((g, s));
        }
    }
    best.map(|(g, _)| LyapunovWeight::new(family, g))
        .ok_or(BoundsError::NoAdmissibleParameter {
            family: family.name().into(),
            p,
        })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub weight: LyapunovWeight,
}

/// `Γ* = min_θ sup_x L_pV_θ/V_θ` over weights whose ratio tends to `−∞`.
pub fn upper_bound(model: &SdeModel, p: f64, family: WeightFamily) -> Result<UpperBound, BoundsError> {
    if family == WeightFamily::Unit {
        return Err(BoundsError::Invalid("the unit weight has no parameter to optimize".into()));
    }
    let gamma = |theta: f64| -> Result<f64, BoundsError> {
        let r = growth_ratio(model, &LyapunovWeight::new(family, theta), p)?;
        Ok(if r.tends_to_neg_inf() { r.sup().0 } else { f64::INFINITY })
    };
    let grid = log_grid(1e-6, 1e6, 2001);
    let vals = grid.iter().map(|&t| gamma(t)).collect::<Result<Vec<_>, _>>()?;
    let (i, &v) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !v.is_finite() {
        return Err(BoundsError::NoAdmissibleParameter {
            family: family.name().into(),
            p,
        });
    }
    // golden section in log θ on the bracketing cell pair
    let mut lo = grid[i.saturating_sub(1)].ln();
    let mut hi = grid[(i + 1).min(grid.len() - 1)].ln();
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (gamma(c.exp())?, gamma(d.exp())?);
    for _ in 0..100 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = gamma(c.exp())?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = gamma(d.exp())?;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let (theta, value) = [(grid[i], v), (c.exp(), fc), (d.exp(), fd)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    Ok(UpperBound {
        value,
        weight: LyapunovWeight::new(family, theta),
    })
}
