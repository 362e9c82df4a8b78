//! Diffusion models with additive functionals.
//!
//! A model is the Stratonovich SDE `dx = X_0 dt + Σ_j X_j ∘ dW^j` together with
//! the functional `A_t = ∫ q_0 dt + Σ_j ∫ q_j ∘ dW^j`. On construction the Itô
//! drift `X_0 + ½ Σ_j X_j' X_j` and the Itô integrand `Q = q_0 + ½ Σ_j X_j q_j`
//! are derived once, so every consumer works with the Itô form.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::field::{Poly, ScalarField, TrigPoly};

/// Simulation state. One-dimensional models use the first slot only.
pub type State = [f64; 3];

/// 2×2 real matrix, row major.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateSpace {
    Line,
    Circle,
    /// (x, y, θ) on ℝ² × S¹ for the Langevin catalog entry.
    Langevin,
}

/// Catalog entries and custom models accepted by [`build_model`].
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    /// `dx = −a x dt + σ dW`, `A_t = ∫ x² dt`.
    OuQuadratic { a: f64, sigma: f64 },
    /// `dx = −a x dt + σ dW`, `Q = a x`, `q_1 = −σ`, so that `A_t = x_0 − x_t`.
    OuLinearDegenerate { a: f64, sigma: f64 },
    /// `dx = (a x − b x³) dt + σ dW`, `A_t = ∫ x² dt`.
    PitchforkQ2 { a: f64, b: f64, sigma: f64 },
    /// `dx = (a x − b x³) dt + σ dW`, `A_t = ∫ x⁴ dt`.
    PitchforkQ4 { a: f64, b: f64, sigma: f64 },
    /// Pitchfork with `A_t = ρ ∫ x dW¹ + √(1−ρ²) ∫ x dW²` (Itô integrals).
    PitchforkCorr { a: f64, b: f64, sigma: f64, rho: f64 },
    /// Angle projection of `dv = B_0 v dt + Σ_j B_j v ∘ dW^j`.
    Linear2dProjected { b0: Mat2, b: Vec<Mat2> },
    /// Damped double-well oscillator with the angle of its linearization.
    Langevin { a: f64, b: f64, beta: f64, sigma: f64 },
    /// User supplied fields in Stratonovich form.
    Custom {
        state_space: StateSpace,
        drift: ScalarField,
        noise: Vec<ScalarField>,
        q0: ScalarField,
        q: Vec<ScalarField>,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::OuQuadratic { .. } => "ou_quadratic",
            ModelSpec::OuLinearDegenerate { .. } => "ou_linear_degenerate",
            ModelSpec::PitchforkQ2 { .. } => "pitchfork_q2",
            ModelSpec::PitchforkQ4 { .. } => "pitchfork_q4",
            ModelSpec::PitchforkCorr { .. } => "pitchfork_corr",
            ModelSpec::Linear2dProjected { .. } => "linear2d_projected",
            ModelSpec::Langevin { .. } => "langevin",
            ModelSpec::Custom { .. } => "custom",
        }
    }

    pub const CATALOG: [&'static str; 7] = [
        "ou_quadratic",
        "ou_linear_degenerate",
        "pitchfork_q2",
        "pitchfork_q4",
        "pitchfork_corr",
        "linear2d_projected",
        "langevin",
    ];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LangevinParams {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl LangevinParams {
    fn drift(&self, s: &State) -> State {
        let [x, y, th] = *s;
        let (sn, cs) = th.sin_cos();
        let k = self.a - 3.0 * self.b * x * x;
        [
            y,
            self.a * x - self.b * x * x * x - self.beta * y,
            -sn * sn + k * cs * cs - self.beta * sn * cs,
        ]
    }

    fn q0(&self, s: &State) -> f64 {
        let [x, _, th] = *s;
        let (sn, cs) = th.sin_cos();
        (1.0 + self.a - 3.0 * self.b * x * x) * sn * cs - self.beta * sn * sn
    }
}

/// Fields of a one-dimensional (line or circle) model.
#[derive(Clone, Debug, PartialEq)]
pub struct LineFields {
    pub drift_strat: ScalarField,
    pub noise: Vec<ScalarField>,
    pub q0: ScalarField,
    /// Functional integrands; channels beyond `q.len()` carry `q_j = 0`.
    pub q: Vec<ScalarField>,
    pub ito_drift: ScalarField,
    pub q_ito: ScalarField,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
enum Fields {
    OneD(LineFields),
    Langevin(LangevinParams),
}

/// A fully derived model. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeModel {
    label: String,
    state_space: StateSpace,
    spec: ModelSpec,
    fields: Fields,
}

/// Coefficients of the twisted generator
/// `L_p = ½ a ∂² + b ∂ + V_p` with `b = Itô drift + pY`, `V_p = pQ + ½p²R`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedCoefficients {
    pub p: f64,
    /// `Σ_j X_j²` (the generator carries ½ of it).
    pub a_diff: ScalarField,
    pub b_drift: ScalarField,
    pub potential: ScalarField,
    /// Coefficient of `Y = Σ_j q_j X_j`.
    pub y_field: ScalarField,
    /// `R = Σ_j q_j²`.
    pub r_field: ScalarField,
}

fn require_finite(name: &str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Invalid(format!("{name} must be finite, got {v}")))
    }
}

fn require_positive(name: &str, v: f64) -> Result<(), ModelError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Builds a model from a catalog entry or custom fields.
pub fn build_model(spec: &ModelSpec) -> Result<SdeModel, ModelError> {
    let x = |c: f64, k: usize| ScalarField::Polynomial(Poly::monomial(c, k));
    let cubic = |a: f64, b: f64| ScalarField::poly(&[0.0, a, 0.0, -b]);
    match spec {
        ModelSpec::OuQuadratic { a, sigma } => {
            require_positive("a", *a)?;
            require_finite("sigma", *sigma)?;
            one_d(
                spec,
                format!("ou_quadratic(a={a}, sigma={sigma})"),
                StateSpace::Line,
                x(-a, 1),
                vec![ScalarField::Constant(*sigma)],
                x(1.0, 2),
                vec![],
            )
        }
        ModelSpec::OuLinearDegenerate { a, sigma } => {
            require_positive("a", *a)?;
            require_finite("sigma", *sigma)?;
            one_d(
                spec,
                format!("ou_linear_degenerate(a={a}, sigma={sigma})"),
                StateSpace::Line,
                x(-a, 1),
                vec![ScalarField::Constant(*sigma)],
                x(*a, 1),
                vec![ScalarField::Constant(-sigma)],
            )
        }
        ModelSpec::PitchforkQ2 { a, b, sigma } | ModelSpec::PitchforkQ4 { a, b, sigma } => {
            require_finite("a", *a)?;
            require_positive("b", *b)?;
            require_finite("sigma", *sigma)?;
            let deg = if matches!(spec, ModelSpec::PitchforkQ2 { .. }) { 2 } else { 4 };
            one_d(
                spec,
                format!("{}(a={a}, b={b}, sigma={sigma})", spec.name()),
                StateSpace::Line,
                cubic(*a, *b),
                vec![ScalarField::Constant(*sigma)],
                x(1.0, deg),
                vec![],
            )
        }
        ModelSpec::PitchforkCorr { a, b, sigma, rho } => {
            require_finite("a", *a)?;
            require_positive("b", *b)?;
            require_finite("sigma", *sigma)?;
            if !(-1.0..=1.0).contains(rho) {
                return Err(ModelError::RhoOutOfRange(*rho));
            }
            // Itô integrals in A_t: the Stratonovich q_0 cancels the ½ X_1 q_1 correction.
            one_d(
                spec,
                format!("pitchfork_corr(a={a}, b={b}, sigma={sigma}, rho={rho})"),
                StateSpace::Line,
                cubic(*a, *b),
                vec![ScalarField::Constant(*sigma), ScalarField::Constant(0.0)],
                ScalarField::Constant(-0.5 * rho * sigma),
                vec![x(*rho, 1), x((1.0 - rho * rho).sqrt(), 1)],
            )
        }
        ModelSpec::Linear2dProjected { b0, b } => project_linear_2d(b0, b),
        ModelSpec::Langevin { a, b, beta, sigma } => {
            require_finite("a", *a)?;
            require_positive("b", *b)?;
            require_positive("beta", *beta)?;
            require_finite("sigma", *sigma)?;
            if *sigma == 0.0 {
                return Err(ModelError::Invalid("langevin needs sigma != 0".into()));
            }
            Ok(SdeModel {
                label: format!("langevin(a={a}, b={b}, beta={beta}, sigma={sigma})"),
                state_space: StateSpace::Langevin,
                spec: spec.clone(),
                fields: Fields::Langevin(LangevinParams {
                    a: *a,
                    b: *b,
                    beta: *beta,
                    sigma: *sigma,
                }),
            })
        }
        ModelSpec::Custom {
            state_space,
            drift,
            noise,
            q0,
            q,
        } => {
            if *state_space == StateSpace::Langevin {
                return Err(ModelError::Invalid(
                    "custom models live on the line or the circle".into(),
                ));
            }
            if noise.is_empty() {
                return Err(ModelError::Invalid("at least one noise channel is required".into()));
            }
            if q.len() > noise.len() {
                return Err(ModelError::Invalid(format!(
                    "{} functional integrands for {} noise channels",
                    q.len(),
                    noise.len()
                )));
            }
            let named = std::iter::once(("drift".to_string(), drift))
                .chain(noise.iter().enumerate().map(|(j, f)| (format!("noise[{j}]"), f)))
                .chain(std::iter::once(("q0".to_string(), q0)))
                .chain(q.iter().enumerate().map(|(j, f)| (format!("q[{j}]"), f)));
            for (name, f) in named {
                match (state_space, f) {
                    (StateSpace::Circle, f) if !f.is_periodic() => {
                        return Err(ModelError::NonPeriodicOnCircle(name));
                    }
                    (StateSpace::Line, ScalarField::Trig(_)) => {
                        return Err(ModelError::Invalid(format!(
                            "field `{name}` is trigonometric but the state space is the line"
                        )));
                    }
                    (_, ScalarField::Polynomial(p)) if p.degree().unwrap_or(0) > 8 => {
                        return Err(ModelError::Invalid(format!(
                            "field `{name}` has degree {} > 8",
                            p.degree().unwrap_or(0)
                        )));
                    }
                    _ => {}
                }
            }
            one_d(
                spec,
                format!("custom({state_space:?})"),
                *state_space,
                drift.clone(),
                noise.clone(),
                q0.clone(),
                q.clone(),
            )
        }
    }
}

fn one_d(
    spec: &ModelSpec,
    label: String,
    state_space: StateSpace,
    drift_strat: ScalarField,
    noise: Vec<ScalarField>,
    q0: ScalarField,
    q: Vec<ScalarField>,
) -> Result<SdeModel, ModelError> {
    // Itô drift: X_0 + ½ Σ_j X_j' X_j
    let mut ito_drift = drift_strat.clone();
    for nj in &noise {
        ito_drift = ito_drift.add(&nj.derivative().mul(nj)?.scale(0.5))?;
    }
    // Q = q_0 + ½ Σ_j X_j q_j
    let mut q_ito = q0.clone();
    for (nj, qj) in noise.iter().zip(&q) {
        q_ito = q_ito.add(&nj.mul(&qj.derivative())?.scale(0.5))?;
    }
    Ok(SdeModel {
        label,
        state_space,
        spec: spec.clone(),
        fields: Fields::OneD(LineFields {
            drift_strat,
            noise,
            q0,
            q,
            ito_drift,
            q_ito,
        }),
    })
}

/// Khas'minskii projection of the 2D linear SDE `dv = B_0 v dt + Σ_j B_j v ∘ dW^j`
/// onto the angle `θ` of `v / |v|`, with `A_t = log|v_t| − log|v_0|`.
///
/// For a constant matrix `B` the tangential component of `Bθ − ⟨Bθ,θ⟩θ` in
/// the angle chart is `B21 cos²θ − B12 sin²θ + (B22 − B11) sinθ cosθ` and the
/// radial rate is `⟨Bθ,θ⟩ = B11 cos²θ + (B12 + B21) sinθ cosθ + B22 sin²θ`.
pub fn project_linear_2d(b0: &Mat2, b: &[Mat2]) -> Result<SdeModel, ModelError> {
    for (name, m) in std::iter::once(("B0", b0)).chain(b.iter().map(|m| ("B_j", m))) {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid(format!("{name} has non-finite entries")));
        }
    }
    let angle = |m: &Mat2| {
        ScalarField::Trig(TrigPoly::new(
            vec![0.0, 0.0, 0.5 * (m[1][0] + m[0][1])]
                .into_iter()
                .enumerate()
                .map(|(k, c)| if k == 0 { 0.5 * (m[1][0] - m[0][1]) } else { c })
                .collect(),
            vec![0.0, 0.0, 0.5 * (m[1][1] - m[0][0])],
        ))
    };
    let radial = |m: &Mat2| {
        ScalarField::Trig(TrigPoly::new(
            vec![0.5 * (m[0][0] + m[1][1]), 0.0, 0.5 * (m[0][0] - m[1][1])],
            vec![0.0, 0.0, 0.5 * (m[0][1] + m[1][0])],
        ))
    };
    let noise: Vec<ScalarField> = b.iter().map(angle).collect();
    let q: Vec<ScalarField> = b.iter().map(radial).collect();
    let spec = ModelSpec::Linear2dProjected {
        b0: *b0,
        b: b.to_vec(),
    };
    let mut model = one_d(
        &spec,
        format!("linear2d_projected({} noise matrices)", b.len()),
        StateSpace::Circle,
        angle(b0),
        noise,
        radial(b0),
        q,
    )?;
    if b.is_empty() {
        model.label = "linear2d_projected(deterministic)".into();
    }
    Ok(model)
}

/// Twisted generator coefficients `L_p = L + pY + pQ + ½p²R` of a 1D model.
pub fn twisted_coefficients(model: &SdeModel, p: f64) -> Result<TwistedCoefficients, ModelError> {
    let f = model.line_fields()?;
    let a_diff = ScalarField::sum(
        f.noise
            .iter()
            .map(|n| n.mul(n))
            .collect::<Result<Vec<_>, _>>()?
            .iter(),
    )?;
    let y_field = ScalarField::sum(
        f.q.iter()
            .zip(&f.noise)
            .map(|(q, n)| q.mul(n))
            .collect::<Result<Vec<_>, _>>()?
            .iter(),
    )?;
    let r_field = ScalarField::sum(
        f.q.iter()
            .map(|q| q.mul(q))
            .collect::<Result<Vec<_>, _>>()?
            .iter(),
    )?;
    let b_drift = f.ito_drift.add(&y_field.scale(p))?;
    let potential = f.q_ito.scale(p).add(&r_field.scale(0.5 * p * p))?;
    Ok(TwistedCoefficients {
        p,
        a_diff,
        b_drift,
        potential,
        y_field,
        r_field,
    })
}

impl SdeModel {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn state_space(&self) -> StateSpace {
        self.state_space
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        match self.fields {
            Fields::OneD(_) => 1,
            Fields::Langevin(_) => 3,
        }
    }

    /// Number of Wiener channels.
    pub fn m(&self) -> usize {
        match &self.fields {
            Fields::OneD(f) => f.noise.len(),
            Fields::Langevin(_) => 1,
        }
    }

    pub fn line_fields(&self) -> Result<&LineFields, ModelError> {
        match &self.fields {
            Fields::OneD(f) => Ok(f),
            Fields::Langevin(_) => Err(ModelError::NotOneDimensional(3)),
        }
    }

    pub fn is_circle(&self) -> bool {
        self.state_space == StateSpace::Circle
    }

    /// Critical exponent `a²/(2σ²)` beyond which `Λ(p) = ∞` (OU quadratic only).
    pub fn critical_p(&self) -> Option<f64> {
        match self.spec {
            ModelSpec::OuQuadratic { a, sigma } if sigma != 0.0 => Some(a * a / (2.0 * sigma * sigma)),
            _ => None,
        }
    }

    /// Characteristic size of the state; the blowup guard is a multiple of it.
    pub fn domain_scale(&self) -> f64 {
        match &self.spec {
            ModelSpec::OuQuadratic { a, sigma } | ModelSpec::OuLinearDegenerate { a, sigma } => {
                (sigma.abs() / (2.0 * a).sqrt()).max(1.0)
            }
            ModelSpec::PitchforkQ2 { a, b, sigma }
            | ModelSpec::PitchforkQ4 { a, b, sigma }
            | ModelSpec::PitchforkCorr { a, b, sigma, .. }
            | ModelSpec::Langevin { a, b, sigma, .. } => (a.max(0.0) / b)
                .sqrt()
                .max((sigma * sigma / b).sqrt().sqrt())
                .max(1.0),
            _ => 1.0,
        }
    }

    /// Itô drift at `x`.
    #[inline]
    pub fn ito_drift(&self, x: &State) -> State {
        match &self.fields {
            Fields::OneD(f) => [f.ito_drift.eval(x[0]), 0.0, 0.0],
            // constant noise: Itô and Stratonovich drifts coincide
            Fields::Langevin(l) => l.drift(x),
        }
    }

    /// Stratonovich drift `X_0` at `x`.
    #[inline]
    pub fn strat_drift(&self, x: &State) -> State {
        match &self.fields {
            Fields::OneD(f) => [f.drift_strat.eval(x[0]), 0.0, 0.0],
            Fields::Langevin(l) => l.drift(x),
        }
    }

    /// Noise vector field `X_j` at `x`.
    #[inline]
    pub fn noise(&self, j: usize, x: &State) -> State {
        match &self.fields {
            Fields::OneD(f) => [f.noise[j].eval(x[0]), 0.0, 0.0],
            Fields::Langevin(l) => [0.0, l.sigma, 0.0],
        }
    }

    /// Itô integrand `Q` of the functional.
    #[inline]
    pub fn q_ito(&self, x: &State) -> f64 {
        match &self.fields {
            Fields::OneD(f) => f.q_ito.eval(x[0]),
            Fields::Langevin(l) => l.q0(x),
        }
    }

    /// Stratonovich integrand `q_0`.
    #[inline]
    pub fn q0(&self, x: &State) -> f64 {
        match &self.fields {
            Fields::OneD(f) => f.q0.eval(x[0]),
            Fields::Langevin(l) => l.q0(x),
        }
    }

    /// Integrand `q_j` of channel `j` (zero when not supplied).
    #[inline]
    pub fn q(&self, j: usize, x: &State) -> f64 {
        match &self.fields {
            Fields::OneD(f) => f.q.get(j).map_or(0.0, |q| q.eval(x[0])),
            Fields::Langevin(_) => 0.0,
        }
    }

    /// Wraps angle coordinates into `[0, 2π)`.
    #[inline]
    pub fn wrap(&self, x: &mut State) {
        match self.state_space {
            StateSpace::Circle => x[0] = x[0].rem_euclid(TAU),
            StateSpace::Langevin => x[2] = x[2].rem_euclid(TAU),
            StateSpace::Line => {}
        }
    }

    /// Norm used by the blowup guard (angles excluded).
    #[inline]
    pub fn guard_norm(&self, x: &State) -> f64 {
        match self.state_space {
            StateSpace::Line => x[0].abs(),
            StateSpace::Circle => 0.0,
            StateSpace::Langevin => x[0].hypot(x[1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_of(f: &ScalarField) -> Poly {
        f.as_poly().unwrap()
    }

    #[test]
    fn pitchfork_q2_fields() {
        let m = build_model(&ModelSpec::PitchforkQ2 { a: 1.0, b: 1.0, sigma: 1.0 }).unwrap();
        let f = m.line_fields().unwrap();
        assert_eq!(poly_of(&f.drift_strat).coeffs(), &[0.0, 1.0, 0.0, -1.0]);
        assert_eq!(f.noise, vec![ScalarField::Constant(1.0)]);
        assert_eq!(poly_of(&f.q0).coeffs(), &[0.0, 0.0, 1.0]);
        assert!(f.q.is_empty());
    }

    #[test]
    fn constant_noise_has_no_ito_correction() {
        let spec = ModelSpec::Custom {
            state_space: StateSpace::Line,
            drift: ScalarField::poly(&[0.3, -1.0, 0.2]),
            noise: vec![ScalarField::Constant(0.7)],
            q0: ScalarField::zero(),
            q: vec![],
        };
        let m = build_model(&spec).unwrap();
        let f = m.line_fields().unwrap();
        assert_eq!(poly_of(&f.ito_drift), poly_of(&f.drift_strat));
    }

    #[test]
    fn q_ito_by_hand() {
        // q0 = 0, q_1 = x, X_1 = σ ∂x  ⇒  Q = ½ σ · 1 = σ/2
        let sigma = 1.7;
        let spec = ModelSpec::Custom {
            state_space: StateSpace::Line,
            drift: ScalarField::poly(&[0.0, -1.0]),
            noise: vec![ScalarField::Constant(sigma)],
            q0: ScalarField::zero(),
            q: vec![ScalarField::poly(&[0.0, 1.0])],
        };
        let m = build_model(&spec).unwrap();
        let q = &m.line_fields().unwrap().q_ito;
        for x in [-2.0, 0.0, 3.5] {
            assert!((q.eval(x) - sigma / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn catalog_errors() {
        let rho = ModelSpec::PitchforkCorr { a: 0.0, b: 1.0, sigma: 1.0, rho: 1.5 };
        assert_eq!(build_model(&rho), Err(ModelError::RhoOutOfRange(1.5)));
        let circle = ModelSpec::Custom {
            state_space: StateSpace::Circle,
            drift: ScalarField::poly(&[0.0, 1.0]),
            noise: vec![ScalarField::Constant(1.0)],
            q0: ScalarField::zero(),
            q: vec![],
        };
        assert!(matches!(
            build_model(&circle),
            Err(ModelError::NonPeriodicOnCircle(name)) if name == "drift"
        ));
    }

    #[test]
    fn isotropic_projection() {
        let s = 0.8;
        let m = project_linear_2d(&[[0.0; 2]; 2], &[[[s, 0.0], [0.0, s]]]).unwrap();
        let f = m.line_fields().unwrap();
        for th in [0.0, 0.4, 2.0, 5.0] {
            assert!(f.drift_strat.eval(th).abs() < 1e-15);
            assert!(f.noise[0].eval(th).abs() < 1e-15);
            assert!((f.q[0].eval(th) - s).abs() < 1e-15);
            assert!(f.q0.eval(th).abs() < 1e-15);
            assert!(f.q_ito.eval(th).abs() < 1e-15);
        }
    }

    #[test]
    fn saddle_projection() {
        let mu = 0.6;
        let m = project_linear_2d(&[[mu, 0.0], [0.0, -mu]], &[]).unwrap();
        let f = m.line_fields().unwrap();
        for th in [0.1, 1.0, 2.5, 4.0] {
            assert!((f.q0.eval(th) - mu * (2.0 * th).cos()).abs() < 1e-14);
            assert!((f.drift_strat.eval(th) + mu * (2.0 * th).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn frozen_langevin_linearization_projection() {
        // B0 = [[0,1],[a − 3b x², −β]] at x = 0 with a = β = 0
        let m = project_linear_2d(&[[0.0, 1.0], [0.0, 0.0]], &[]).unwrap();
        let f = m.line_fields().unwrap();
        for th in [0.3, 1.2, 3.3] {
            assert!((f.q0.eval(th) - th.sin() * th.cos()).abs() < 1e-14);
            // angle drift −sin²θ + (a − 3bx²) cos²θ − β sinθ cosθ with a = β = 0
            assert!((f.drift_strat.eval(th) + th.sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn twisted_ou() {
        let m = build_model(&ModelSpec::OuQuadratic { a: 1.3, sigma: 0.9 }).unwrap();
        let tc = twisted_coefficients(&m, 0.2).unwrap();
        assert_eq!(poly_of(&tc.potential).coeffs(), &[0.0, 0.0, 0.2]);
        assert_eq!(poly_of(&tc.b_drift).coeffs(), &[0.0, -1.3]);
        let zero = twisted_coefficients(&m, 0.0).unwrap();
        assert!(zero.potential.is_zero());
        assert_eq!(zero.b_drift, m.line_fields().unwrap().ito_drift);
    }

    #[test]
    fn twisted_pitchfork_corr() {
        let (a, b, sigma, rho, p) = (0.5, 1.0, 1.2, 0.3, 2.0);
        let m = build_model(&ModelSpec::PitchforkCorr { a, b, sigma, rho }).unwrap();
        let tc = twisted_coefficients(&m, p).unwrap();
        let bd = poly_of(&tc.b_drift);
        assert!((bd.coeff(1) - (a + p * rho * sigma)).abs() < 1e-14);
        assert!((bd.coeff(3) + b).abs() < 1e-14);
        let r = poly_of(&tc.r_field);
        assert!((r.coeff(2) - 1.0).abs() < 1e-14);
        let y = poly_of(&tc.y_field);
        assert!((y.coeff(1) - rho * sigma).abs() < 1e-14);
        // Q = 0: A_t is a pure Itô integral
        assert!(m.line_fields().unwrap().q_ito.is_zero());
    }

    #[test]
    fn langevin_fields_match_formulas() {
        let (a, b, beta, sigma) = (1.0, 1.0, 1.0, 1.0);
        let m = build_model(&ModelSpec::Langevin { a, b, beta, sigma }).unwrap();
        assert_eq!(m.dim(), 3);
        let s = [0.7, -0.2, 1.1];
        let d = m.ito_drift(&s);
        let (sn, cs) = s[2].sin_cos();
        assert!((d[2] - (-sn * sn + (a - 3.0 * b * 0.49) * cs * cs - beta * sn * cs)).abs() < 1e-14);
        let q = (1.0 + a - 3.0 * b * 0.49) * sn * cs - beta * sn * sn;
        assert!((m.q_ito(&s) - q).abs() < 1e-14);
        assert!(twisted_coefficients(&m, 1.0).is_err());
    }

    fn arb_mat() -> impl Strategy<Value = Mat2> {
        prop::array::uniform2(prop::array::uniform2(-2.0f64..2.0))
    }

    proptest! {
        #[test]
        fn projected_fields_are_periodic(b0 in arb_mat(), b1 in arb_mat()) {
            let m = project_linear_2d(&b0, &[b1]).unwrap();
            let f = m.line_fields().unwrap();
            for g in [&f.drift_strat, &f.noise[0], &f.q0, &f.q[0], &f.ito_drift, &f.q_ito] {
                prop_assert!((g.eval(0.0) - g.eval(TAU)).abs() < 1e-12);
            }
        }

        #[test]
        fn projection_matches_vector_formulas(b0 in arb_mat(), th in 0.0f64..TAU) {
            let m = project_linear_2d(&b0, &[]).unwrap();
            let f = m.line_fields().unwrap();
            let v = [th.cos(), th.sin()];
            let bv = [b0[0][0] * v[0] + b0[0][1] * v[1], b0[1][0] * v[0] + b0[1][1] * v[1]];
            let radial = bv[0] * v[0] + bv[1] * v[1];
            let tangential = -bv[0] * v[1] + bv[1] * v[0];
            prop_assert!((f.q0.eval(th) - radial).abs() < 1e-12);
            prop_assert!((f.drift_strat.eval(th) - tangential).abs() < 1e-12);
        }

        #[test]
        fn q_ito_matches_finite_differences(
            n in prop::collection::vec(-1.0f64..1.0, 1..4),
            q in prop::collection::vec(-1.0f64..1.0, 1..4),
            q0 in prop::collection::vec(-1.0f64..1.0, 1..4),
            x in -2.0f64..2.0,
        ) {
            let noise = ScalarField::poly(&n);
            let qj = ScalarField::poly(&q);
            let spec = ModelSpec::Custom {
                state_space: StateSpace::Line,
                drift: ScalarField::poly(&[0.0, -1.0]),
                noise: vec![noise.clone()],
                q0: ScalarField::poly(&q0),
                q: vec![qj.clone()],
            };
            let m = build_model(&spec).unwrap();
            let f = m.line_fields().unwrap();
            let h = 1e-5;
            let dq = (qj.eval(x + h) - qj.eval(x - h)) / (2.0 * h);
            let dn = (noise.eval(x + h) - noise.eval(x - h)) / (2.0 * h);
            let q_fd = f.q0.eval(x) + 0.5 * noise.eval(x) * dq;
            let b_fd = f.drift_strat.eval(x) + 0.5 * dn * noise.eval(x);
            prop_assert!((f.q_ito.eval(x) - q_fd).abs() < 1e-8);
            prop_assert!((f.ito_drift.eval(x) - b_fd).abs() < 1e-8);
        }

        #[test]
        fn channel_order_does_not_matter(
            n1 in prop::collection::vec(-1.0f64..1.0, 1..3),
            n2 in prop::collection::vec(-1.0f64..1.0, 1..3),
            q1 in prop::collection::vec(-1.0f64..1.0, 1..3),
            q2 in prop::collection::vec(-1.0f64..1.0, 1..3),
            x in -2.0f64..2.0,
        ) {
            let build = |noise: Vec<ScalarField>, q: Vec<ScalarField>| {
                build_model(&ModelSpec::Custom {
                    state_space: StateSpace::Line,
                    drift: ScalarField::poly(&[0.1, -1.0]),
                    noise,
                    q0: ScalarField::poly(&[0.0, 0.5]),
                    q,
                })
                .unwrap()
            };
            let (a1, a2) = (ScalarField::poly(&n1), ScalarField::poly(&n2));
            let (b1, b2) = (ScalarField::poly(&q1), ScalarField::poly(&q2));
            let m1 = build(vec![a1.clone(), a2.clone()], vec![b1.clone(), b2.clone()]);
            let m2 = build(vec![a2, a1], vec![b2, b1]);
            let (f1, f2) = (m1.line_fields().unwrap(), m2.line_fields().unwrap());
            prop_assert!((f1.q_ito.eval(x) - f2.q_ito.eval(x)).abs() < 1e-12);
            prop_assert!((f1.ito_drift.eval(x) - f2.ito_drift.eval(x)).abs() < 1e-12);
        }
    }
}
