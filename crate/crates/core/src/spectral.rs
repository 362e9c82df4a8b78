//! Principal eigenpair of the weight-conjugated twisted generator on a grid.
//!
//! `H_p h = V^{-1} L_p (V h)` expands to
//! `½a h'' + (b + aU') h' + (½a(U'' + U'²) + bU' + V_p) h` with `U = log V`.
//! Second derivatives are central; first derivatives are central unless the
//! cell Péclet number exceeds 2, where they switch to first-order upwinding so
//! every off-diagonal stays nonnegative.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{growth_ratio, LyapunovWeight, WeightFamily};
use crate::error::{BoundsError, SpectralError};
use crate::model::{twisted_coefficients, SdeModel, StateSpace};

use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Domain {
    /// Dirichlet zero at both ends; nodes are interior.
    Interval { x_min: f64, x_max: f64 },
    /// `[0, 2π)` with periodic wrap.
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub domain: Domain,
    pub n: usize,
}

impl GridSpec {
    pub fn interval(x_max: f64, n: usize) -> Self {
        Self {
            domain: Domain::Interval { x_min: -x_max, x_max },
            n,
        }
    }

    pub fn circle(n: usize) -> Self {
        Self {
            domain: Domain::Circle,
            n,
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.n < 16 {
            return Err(SpectralError::InvalidGrid(format!("n = {} < 16", self.n)));
        }
        if let Domain::Interval { x_min, x_max } = self.domain {
            if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
                return Err(SpectralError::InvalidGrid(format!("bad interval [{x_min}, {x_max}]")));
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Interval { x_min, x_max } => (x_max - x_min) / (self.n + 1) as f64,
            Domain::Circle => TAU / self.n as f64,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let d = self.spacing();
        match self.domain {
            Domain::Interval { x_min, .. } => (0..self.n).map(|i| x_min + (i + 1) as f64 * d).collect(),
            Domain::Circle => (0..self.n).map(|i| i as f64 * d).collect(),
        }
    }

    /// Grid with half the spacing on the same domain.
    pub fn refined(&self) -> Self {
        let n = match self.domain {
            Domain::Interval { .. } => 2 * self.n + 1,
            Domain::Circle => 2 * self.n,
        };
        Self { n, ..*self }
    }

    pub fn x_max(&self) -> Option<f64> {
        match self.domain {
            Domain::Interval { x_max, .. } => Some(x_max),
            Domain::Circle => None,
        }
    }
}

/// Tridiagonal (interval) or cyclic tridiagonal (circle) discretization of `H_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatedOperator {
    pub grid: GridSpec,
    pub weight: LyapunovWeight,
    pub p: f64,
    pub nodes: Vec<f64>,
    /// Coupling of node `i` to `i − 1` (wraps to `n − 1` on the circle).
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Coupling of node `i` to `i + 1` (wraps to `0` on the circle).
    pub upper: Vec<f64>,
    /// `H_p 1 = L_pV/V` at each node.
    pub zeroth_order: Vec<f64>,
    pub upwinded: Vec<bool>,
}

impl ConjugatedOperator {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_cyclic(&self) -> bool {
        matches!(self.grid.domain, Domain::Circle)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let cyc = self.is_cyclic();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                } else if cyc {
                    v += self.lower[0] * x[n - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                } else if cyc {
                    v += self.upper[n - 1] * x[0];
                }
                v
            })
            .collect()
    }

    /// Largest row sum; bounds the principal eigenvalue of a Metzler matrix.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n())
            .map(|i| self.row_entries(i).0 + self.diag[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute row sum.
    pub fn max_row_magnitude(&self) -> f64 {
        (0..self.n())
            .map(|i| self.row_entries(i).1 + self.diag[i].abs())
            .fold(0.0, f64::max)
    }

    /// Sum and absolute sum of the off-diagonal entries present in row `i`.
    fn row_entries(&self, i: usize) -> (f64, f64) {
        let n = self.n();
        let cyc = self.is_cyclic();
        let mut s = 0.0;
        let mut a = 0.0;
        if i > 0 || cyc {
            s += self.lower[i];
            a += self.lower[i].abs();
        }
        if i + 1 < n || cyc {
            s += self.upper[i];
            a += self.upper[i].abs();
        }
        (s, a)
    }

    pub fn n_upwinded(&self) -> usize {
        self.upwinded.iter().filter(|&&u| u).count()
    }
}

/// Discretizes `H_p` for a line model on an interval or a circle model on `[0, 2π)`.
pub fn assemble(
    model: &SdeModel,
    p: f64,
    grid: &GridSpec,
    weight: &LyapunovWeight,
) -> Result<ConjugatedOperator, SpectralError> {
    grid.validate()?;
    let tc = twisted_coefficients(model, p)?;
    match (grid.domain, model.state_space()) {
        (Domain::Interval { .. }, StateSpace::Line) => {
            let ratio = growth_ratio(model, weight, p).map_err(|e| match e {
                BoundsError::Model(m) => SpectralError::Model(m),
                other => SpectralError::InvalidGrid(other.to_string()),
            })?;
            if !ratio.tends_to_neg_inf() {
                let detail = match ratio.excess() {
                    Some((e, c)) => format!("leading term {c:e}·x^{e}"),
                    None => "ratio vanishes identically".into(),
                };
                return Err(SpectralError::InadmissibleWeight {
                    weight: weight.params_string(),
                    p,
                    detail,
                });
            }
        }
        (Domain::Circle, StateSpace::Circle) => {
            if weight.family != WeightFamily::Unit {
                return Err(SpectralError::InvalidGrid(
                    "the circle is compact; use the unit weight".into(),
                ));
            }
        }
        (d, s) => {
            return Err(SpectralError::InvalidGrid(format!(
                "domain {d:?} does not match the model state space {s:?}"
            )));
        }
    }
    let dx = grid.spacing();
    let nodes = grid.nodes();
    let n = nodes.len();
    let (mut lower, mut diag, mut upper) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut zeroth_order = vec![0.0; n];
    let mut upwinded = vec![false; n];
    for (i, &x) in nodes.iter().enumerate() {
        let a = tc.a_diff.eval(x);
        let b = tc.b_drift.eval(x);
        let (u1, u2) = (weight.u1(x), weight.u2(x));
        let c = b + a * u1;
        let d0 = 0.5 * a * (u2 + u1 * u1) + b * u1 + tc.potential.eval(x);
        let dd = 0.5 * a / (dx * dx);
        let (lo, up) = (dd - c / (2.0 * dx), dd + c / (2.0 * dx));
        zeroth_order[i] = d0;
        if lo < 0.0 || up < 0.0 {
            upwinded[i] = true;
            if c > 0.0 {
                lower[i] = dd;
                upper[i] = dd + c / dx;
            } else {
                lower[i] = dd - c / dx;
                upper[i] = dd;
            }
            diag[i] = d0 - 2.0 * dd - c.abs() / dx;
        } else {
            lower[i] = lo;
            upper[i] = up;
            diag[i] = d0 - 2.0 * dd;
        }
    }
    Ok(ConjugatedOperator {
        grid: *grid,
        weight: *weight,
        p,
        nodes,
        lower,
        diag,
        upper,
        zeroth_order,
        upwinded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PowerMethod {
    /// Power iteration on the nonnegative resolvent `(σ − H)^{-1}` with adaptive `σ`.
    Resolvent,
    /// Power iteration on `M = sI + H`, `s = 1 + max row magnitude`.
    Shifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Convergence when the Collatz–Wielandt bracket is narrower than `tol·(1 + |λ|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub method: PowerMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 10_000,
            method: PowerMethod::Resolvent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralResult {
    pub p: f64,
    pub lambda: f64,
    /// Positive grid function `h = φ_p / V`, normalized to max 1.
    pub eigvec: Vec<f64>,
    pub residual: f64,
    /// Estimate of `λ₁ − Re λ₂` from the contraction of fixed-shift iterates.
    pub gap_estimate: f64,
    /// The same gap expressed as the contraction ratio of the shifted iteration.
    pub contraction: f64,
    pub iterations: usize,
    pub grid: GridSpec,
    pub weight: LyapunovWeight,
    pub nodes: Vec<f64>,
}

impl SpectralResult {
    /// Rows `(x, h, V, φ = hV)`.
    pub fn eigenfunction(&self) -> Vec<[f64; 4]> {
        self.nodes
            .iter()
            .zip(&self.eigvec)
            .map(|(&x, &h)| {
                let v = self.weight.v(x);
                [x, h, v, h * v]
            })
            .collect()
    }
}

/// Solves `(σ − H) y = x`; `None` unless the solution is finite and positive,
/// which for a Metzler `H` certifies `σ > λ₁`.
fn resolvent_solve(op: &ConjugatedOperator, sigma: f64, x: &[f64]) -> Option<Vec<f64>> {
    let n = op.n();
    let a: Vec<f64> = op.lower.iter().map(|v| -v).collect();
    let mut b: Vec<f64> = op.diag.iter().map(|d| sigma - d).collect();
    let c: Vec<f64> = op.upper.iter().map(|v| -v).collect();
    let y = if op.is_cyclic() {
        // Sherman–Morrison on the corner entries a[0] and c[n−1]
        let gamma = -b[0];
        let (b0, bn) = (b[0], b[n - 1]);
        b[0] = b0 - gamma;
        b[n - 1] = bn - a[0] * c[n - 1] / gamma;
        let y = thomas(&a, &b, &c, x)?;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = c[n - 1];
        let z = thomas(&a, &b, &c, &u)?;
        let vy = y[0] + a[0] / gamma * y[n - 1];
        let vz = z[0] + a[0] / gamma * z[n - 1];
        let f = vy / (1.0 + vz);
        y.iter().zip(&z).map(|(y, z)| y - f * z).collect()
    } else {
        thomas(&a, &b, &c, x)?
    };
    y.iter().all(|v| v.is_finite() && *v > 0.0).then_some(y)
}

/// Thomas algorithm; `None` on a nonpositive pivot.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let mut piv = b[0];
    if !(piv > 0.0) {
        return None;
    }
    cp[0] = c[0] / piv;
    dp[0] = d[0] / piv;
    for i in 1..n {
        piv = b[i] - a[i] * cp[i - 1];
        if !(piv > 0.0) {
            return None;
        }
        cp[i] = c[i] / piv;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv;
    }
    let mut y = dp;
    for i in (0..n - 1).rev() {
        y[i] -= cp[i] * y[i + 1];
    }
    Some(y)
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

/// `min` and `max` of `num_i / den_i`.
fn ratio_range(num: &[f64], den: &[f64]) -> (f64, f64) {
    num.iter()
        .zip(den)
        .map(|(n, d)| n / d)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

fn residual(op: &ConjugatedOperator, h: &[f64], lambda: f64) -> f64 {
    let hh = op.apply(h);
    let num = hh
        .iter()
        .zip(h)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max);
    num / h.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn start_vector(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

fn resolvent_iteration(op: &ConjugatedOperator, opts: &SolverOptions) -> Result<(f64, Vec<f64>, usize), SpectralError> {
    let n = op.n();
    let scale = 1.0 + op.max_row_magnitude();
    let mut sigma = op.max_row_sum() + 1.0;
    let mut delta = 1.0;
    let mut x = start_vector(n);
    let mut lam_lo = f64::NEG_INFINITY;
    let mut lam_hi = sigma;
    let mut width = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let Some(mut y) = resolvent_solve(op, sigma, &x) else {
            // σ fell on or below λ₁ in floating point: back off
            delta *= 10.0;
            sigma = lam_hi + delta;
            if !(delta < 1e3 * scale) {
                return Err(SpectralError::NotConverged { iterations: it, residual: width });
            }
            continue;
        };
        let (rmin, rmax) = ratio_range(&x, &y);
        lam_lo = lam_lo.max(sigma - rmax);
        lam_hi = lam_hi.min(sigma - rmin);
        width = lam_hi - lam_lo;
        normalize_max(&mut y);
        x = y;
        let lam = 0.5 * (lam_lo + lam_hi);
        if width <= opts.tol * (1.0 + lam.abs()) {
            return Ok((lam, x, it));
        }
        delta = width.max(1e-3 * opts.tol * (1.0 + lam.abs()));
        sigma = lam_hi + delta;
    }
    Err(SpectralError::NotConverged {
        iterations: opts.max_iter,
        residual: width,
    })
}

fn shifted_iteration(op: &ConjugatedOperator, opts: &SolverOptions) -> Result<(f64, Vec<f64>, usize), SpectralError> {
    let s = 1.0 + op.max_row_magnitude();
    let mut x = start_vector(op.n());
    let mut width = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mut y = op.apply(&x);
        y.iter_mut().zip(&x).for_each(|(y, x)| *y += s * x);
        let (rmin, rmax) = ratio_range(&y, &x);
        width = rmax - rmin;
        normalize_max(&mut y);
        let hy = op.apply(&y);
        let rq = hy.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / y.iter().map(|v| v * v).sum::<f64>();
        x = y;
        if width <= opts.tol * (1.0 + rq.abs()) {
            return Ok((rq, x, it));
        }
    }
    Err(SpectralError::NotConverged {
        iterations: opts.max_iter,
        residual: width,
    })
}

/// Gap from the contraction of fixed-shift resolvent iterates started off the eigenvector.
fn gap_estimate(op: &ConjugatedOperator, lambda: f64, h: &[f64]) -> f64 {
    let n = op.n();
    let mut offset = 0.1 * (1.0 + lambda.abs());
    for _ in 0..8 {
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
        normalize_max(&mut x);
        let err = |x: &[f64]| {
            let k = x.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / h.iter().map(|v| v * v).sum::<f64>();
            x.iter().zip(h).map(|(a, b)| (a - k * b).abs()).fold(0.0, f64::max)
        };
        let mut e_prev = err(&x);
        let mut ratio = f64::NAN;
        for _ in 0..60 {
            let Some(mut y) = resolvent_solve(op, lambda + offset, &x) else {
                break;
            };
            normalize_max(&mut y);
            let e = err(&y);
            if e < 1e-12 || e_prev == 0.0 {
                break;
            }
            ratio = e / e_prev;
            e_prev = e;
            x = y;
        }
        if !ratio.is_finite() || ratio < 0.02 {
            offset *= 10.0;
        } else if ratio > 0.98 {
            if ratio >= 1.0 {
                return 0.0;
            }
            offset /= 10.0;
        } else {
            return offset * (1.0 / ratio - 1.0);
        }
    }
    f64::NAN
}

/// Principal eigenpair by Perron-positive power iteration.
pub fn principal_eigpair(op: &ConjugatedOperator, opts: &SolverOptions) -> Result<SpectralResult, SpectralError> {
    let (lambda, mut h, iterations) = match opts.method {
        PowerMethod::Resolvent => resolvent_iteration(op, opts)?,
        PowerMethod::Shifted => shifted_iteration(op, opts)?,
    };
    normalize_max(&mut h);
    if let Some(i) = h.iter().position(|&v| !(v > 0.0)) {
        return Err(SpectralError::SignChange(i));
    }
    let residual = residual(op, &h, lambda);
    let gap = gap_estimate(op, lambda, &h);
    let s = 1.0 + op.max_row_magnitude();
    Ok(SpectralResult {
        p: op.p,
        lambda,
        residual,
        gap_estimate: gap,
        contraction: (s + lambda - gap) / (s + lambda),
        iterations,
        grid: op.grid,
        weight: op.weight,
        nodes: op.nodes.clone(),
        eigvec: h,
    })
}

/// Assembles and solves in one step.
pub fn solve(
    model: &SdeModel,
    p: f64,
    grid: &GridSpec,
    weight: &LyapunovWeight,
    opts: &SolverOptions,
) -> Result<SpectralResult, SpectralError> {
    principal_eigpair(&assemble(model, p, grid, weight)?, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub spacing: f64,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<RefinementLevel>,
    pub richardson: f64,
    pub observed_order: f64,
    /// `|λ(x_max) − λ(1.5 x_max)|` at the base spacing; `None` on the circle.
    pub domain_sensitivity: Option<f64>,
    /// Successive differences share a sign and shrink.
    pub monotone: bool,
}

/// Solves on three nested grids (and a wider interval) and reports convergence.
pub fn refine_and_validate(
    model: &SdeModel,
    p: f64,
    weight: &LyapunovWeight,
    base_grid: &GridSpec,
    opts: &SolverOptions,
) -> Result<(SpectralResult, ConvergenceReport), SpectralError> {
    let g1 = *base_grid;
    let g2 = g1.refined();
    let g3 = g2.refined();
    let mut results = [g1, g2, g3]
        .par_iter()
        .map(|g| solve(model, p, g, weight, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let levels: Vec<RefinementLevel> = results
        .iter()
        .map(|r| RefinementLevel {
            n: r.grid.n,
            spacing: r.grid.spacing(),
            lambda: r.lambda,
            residual: r.residual,
        })
        .collect();
    let (l1, l2, l3) = (levels[0].lambda, levels[1].lambda, levels[2].lambda);
    let (d12, d23) = (l1 - l2, l2 - l3);
    let observed_order = (d12 / d23).abs().log2();
    let q = if observed_order.is_finite() && (0.5..=4.0).contains(&observed_order) {
        observed_order
    } else {
        2.0
    };
    let richardson = l3 + (l3 - l2) / (2f64.powf(q) - 1.0);
    let monotone = d12 * d23 > 0.0 && d23.abs() < d12.abs() || (d12 == 0.0 && d23 == 0.0);
    let domain_sensitivity = match g1.domain {
        Domain::Interval { x_min, x_max } => {
            let dx = g1.spacing();
            let n_wide = (1.5 * (g1.n + 1) as f64).round() as usize - 1;
            let half = 0.5 * (n_wide + 1) as f64 * dx;
            let mid = 0.5 * (x_min + x_max);
            let wide = GridSpec {
                domain: Domain::Interval {
                    x_min: mid - half,
                    x_max: mid + half,
                },
                n: n_wide,
            };
            Some((solve(model, p, &wide, weight, opts)?.lambda - l1).abs())
        }
        Domain::Circle => None,
    };
    let finest = results.pop().expect("three levels");
    Ok((
        finest,
        ConvergenceReport {
            levels,
            richardson,
            observed_order,
            domain_sensitivity,
            monotone,
        },
    ))
}

/// Weight used for each `p` of a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightChoice {
    Fixed(LyapunovWeight),
    /// The admissible member of the family with the smallest `sup L_pV/V`.
    Auto(WeightFamily),
}

/// Solves independently at each `p`, in parallel.
pub fn lambda_curve(
    model: &SdeModel,
    p_grid: &[f64],
    grid: &GridSpec,
    weight: WeightChoice,
    opts: &SolverOptions,
) -> Vec<Result<SpectralResult, SpectralError>> {
    p_grid
        .par_iter()
        .map(|&p| {
            let w = match weight {
                WeightChoice::Fixed(w) => w,
                WeightChoice::Auto(f) if model.is_circle() || f == WeightFamily::Unit => LyapunovWeight::UNIT,
                WeightChoice::Auto(f) => crate::bounds::find_admissible(model, f, p).map_err(|e| {
                    SpectralError::InadmissibleWeight {
                        weight: f.name().into(),
                        p,
                        detail: e.to_string(),
                    }
                })?,
            };
            solve(model, p, grid, &w, opts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, project_linear_2d, ModelSpec};
    use proptest::prelude::*;

    fn ou() -> SdeModel {
        build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap()
    }

    fn ou_closed(p: f64) -> f64 {
        0.5 * (1.0 - (1.0 - 2.0 * p).sqrt())
    }

    #[test]
    fn ou_zeroth_order_matches_growth_ratio() {
        let op = assemble(&ou(), 0.375, &GridSpec::interval(6.0, 200), &LyapunovWeight::exp_quadratic(0.5)).unwrap();
        for (x, d) in op.nodes.iter().zip(&op.zeroth_order) {
            assert!((d - (0.5 - 0.125 * x * x)).abs() < 1e-12);
        }
        assert_eq!(op.n_upwinded(), 0);
    }

    #[test]
    fn ou_eigenvalues() {
        let grid = GridSpec::interval(6.0, 1200);
        let w = LyapunovWeight::exp_quadratic(0.5);
        for p in [-1.0, 0.2, 0.375] {
            let r = solve(&ou(), p, &grid, &w, &SolverOptions::default()).unwrap();
            assert!((r.lambda - ou_closed(p)).abs() < 1e-3, "p={p}: {}", r.lambda);
            assert!(r.residual < 1e-6, "residual {}", r.residual);
        }
    }

    #[test]
    fn shifted_method_agrees() {
        let grid = GridSpec::interval(5.0, 60);
        let w = LyapunovWeight::exp_quadratic(0.5);
        let op = assemble(&ou(), 0.2, &grid, &w).unwrap();
        let a = principal_eigpair(&op, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            tol: 1e-10,
            max_iter: 2_000_000,
            method: PowerMethod::Shifted,
        };
        let b = principal_eigpair(&op, &opts).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-7);
    }

    #[test]
    fn inadmissible_weight_is_refused() {
        let err = assemble(&ou(), 0.6, &GridSpec::interval(6.0, 100), &LyapunovWeight::exp_quadratic(0.5));
        assert!(matches!(err, Err(SpectralError::InadmissibleWeight { .. })));
    }

    #[test]
    fn pitchfork_edges_are_upwinded() {
        let m = build_model(&ModelSpec::PitchforkQ2 { a: 0.0, b: 1.0, sigma: 1.0 }).unwrap();
        let op = assemble(&m, 10.0, &GridSpec::interval(6.0, 200), &LyapunovWeight::exp_quadratic(1.0)).unwrap();
        let dx = op.grid.spacing();
        let tc = twisted_coefficients(&m, 10.0).unwrap();
        for (i, &x) in op.nodes.iter().enumerate() {
            let a = tc.a_diff.eval(x);
            let c = tc.b_drift.eval(x) + a * 2.0 * x;
            assert_eq!(op.upwinded[i], c.abs() * dx / (0.5 * a) > 2.0);
        }
        assert!(op.upwinded[0] && op.upwinded[op.n() - 1]);
        assert!(!op.upwinded[op.n() / 2]);
        assert!(op.lower.iter().chain(&op.upper).all(|&v| v >= 0.0));
    }

    #[test]
    fn circle_isotropic() {
        let sigma = 0.6;
        let m = project_linear_2d(&[[0.0; 2]; 2], &[[[sigma, 0.0], [0.0, sigma]]]).unwrap();
        for p in [1.0, 2.0] {
            let r = solve(&m, p, &GridSpec::circle(64), &LyapunovWeight::UNIT, &SolverOptions::default()).unwrap();
            assert!((r.lambda - 0.5 * p * p * sigma * sigma).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_at_zero() {
        let m = project_linear_2d(&[[0.3, 1.0], [-0.4, 0.1]], &[[[0.5, 0.2], [-0.1, 0.4]]]).unwrap();
        let op = assemble(&m, 0.0, &GridSpec::circle(128), &LyapunovWeight::UNIT).unwrap();
        for i in 0..op.n() {
            assert!((op.diag[i] + op.lower[i] + op.upper[i]).abs() < 1e-9);
        }
        let ones = vec![1.0; op.n()];
        assert!(op.apply(&ones).iter().all(|v| v.abs() < 1e-9));
        let r = principal_eigpair(&op, &SolverOptions::default()).unwrap();
        assert!(r.lambda.abs() < 1e-8);
        let (lo, hi) = r.eigvec.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!((hi - lo) / hi < 1e-6);
    }

    #[test]
    fn ou_refinement() {
        let (r, rep) = refine_and_validate(
            &ou(),
            0.375,
            &LyapunovWeight::exp_quadratic(0.5),
            &GridSpec::interval(6.0, 150),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((1.5..=2.5).contains(&rep.observed_order), "{}", rep.observed_order);
        assert!(rep.domain_sensitivity.unwrap() < 1e-5);
        assert!((rep.richardson - 0.25).abs() < (r.lambda - 0.25).abs());
        assert!(rep.monotone);
        assert_eq!(r.grid.n, 4 * 150 + 3);
    }

    #[test]
    fn circle_refinement_skips_domain_step() {
        let m = project_linear_2d(&[[0.0, 1.0], [-1.0, 0.0]], &[[[0.3, 0.0], [0.0, -0.3]]]).unwrap();
        let (_, rep) =
            refine_and_validate(&m, 1.0, &LyapunovWeight::UNIT, &GridSpec::circle(32), &SolverOptions::default()).unwrap();
        assert!(rep.domain_sensitivity.is_none());
    }

    #[test]
    fn ou_gap() {
        // OU conjugated by e^{x²/2} at p: spectrum λ₁ − k√(1 − 2p); the gap is √(1 − 2p)
        let r = solve(&ou(), 0.0, &GridSpec::interval(6.0, 600), &LyapunovWeight::exp_quadratic(0.5), &SolverOptions::default())
            .unwrap();
        assert!((r.gap_estimate - 1.0).abs() < 0.05, "gap {}", r.gap_estimate);
        assert!(r.contraction < 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn metzler_and_positive(g in 0.3f64..2.0, p in -3.0f64..8.0, a in -1.0f64..1.0) {
            let m = build_model(&ModelSpec::PitchforkQ2 { a, b: 1.0, sigma: 1.0 }).unwrap();
            let op = assemble(&m, p, &GridSpec::interval(4.0, 120), &LyapunovWeight::exp_quadratic(g)).unwrap();
            prop_assert!(op.lower.iter().chain(&op.upper).all(|&v| v >= 0.0));
            let r = principal_eigpair(&op, &SolverOptions::default()).unwrap();
            prop_assert!(r.eigvec.iter().all(|&v| v > 0.0));
        }

        #[test]
        fn conjugation_invariance(g1 in 0.42f64..0.5, g2 in 0.5f64..0.58) {
            let grid = GridSpec::interval(6.0, 400);
            let opts = SolverOptions::default();
            let r1 = solve(&ou(), 0.3, &grid, &LyapunovWeight::exp_quadratic(g1), &opts).unwrap();
            let r2 = solve(&ou(), 0.3, &grid, &LyapunovWeight::exp_quadratic(g2), &opts).unwrap();
            prop_assert!((r1.lambda - r2.lambda).abs() < 1e-3);
        }
    }
}
