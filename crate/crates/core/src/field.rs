//! Scalar coefficient fields: real polynomials on the line and trigonometric
//! polynomials on the circle.
//!
//! Every coefficient function in a model (drift, noise, functional data) is a
//! [`ScalarField`]. Derivatives and products stay inside the same family, so
//! the Itô correction, the twisted coefficients and the growth ratio
//! `L_p V / V` are all computed exactly.

use std::fmt;

use crate::error::ModelError;

/// Coefficients below this (relative to the largest one) are treated as zero
/// when reading off the leading term.
pub const LEADING_REL_TOL: f64 = 1e-12;

/// Real polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `c x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(&c) if c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree and coefficient of the leading term after discarding
    /// coefficients that are negligible relative to the largest one.
    pub fn leading_term(&self) -> Option<(usize, f64)> {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return None;
        }
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.abs() > LEADING_REL_TOL * scale)
            .map(|(k, &c)| (k, c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = vec![0.0];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k as f64 + 1.0)),
        );
        Poly::new(coeffs)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// True when every odd coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// Real roots inside `[lo, hi]`, located by a sign-change scan followed
    /// by bisection. Double roots that do not change sign are not reported.
    pub fn real_roots_in(&self, lo: f64, hi: f64, scan: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return roots;
        }
        let step = (hi - lo) / scan as f64;
        let mut x0 = lo;
        let mut f0 = self.eval(x0);
        for i in 1..=scan {
            let x1 = lo + step * i as f64;
            let f1 = self.eval(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = self.eval(m);
                    if fm == 0.0 || (b - a) <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
                        a = m;
                        b = m;
                        break;
                    }
                    if fa * fm < 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        if f0 == 0.0 {
            roots.push(x0);
        }
        roots
    }

    /// All real roots of odd multiplicity, isolated between consecutive
    /// roots of the derivative.
    pub fn real_roots(&self) -> Vec<f64> {
        let Some((deg, _)) = self.leading_term() else {
            return Vec::new();
        };
        let p = Poly::new(self.coeffs[..=deg].to_vec());
        match deg {
            0 => return Vec::new(),
            1 => return vec![-p.coeff(0) / p.coeff(1)],
            _ => {}
        }
        let r = p.root_bound();
        let mut knots = vec![-r];
        knots.extend(p.derivative().real_roots().into_iter().filter(|x| x.abs() < r));
        knots.push(r);
        let mut roots: Vec<f64> = Vec::new();
        for w in knots.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut fa, fb) = (p.eval(a), p.eval(b));
            if fa == 0.0 {
                if roots.last() != Some(&a) {
                    roots.push(a);
                }
                continue;
            }
            if fa * fb >= 0.0 || a >= b {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = p.eval(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        if p.eval(r) == 0.0 {
            roots.push(r);
        }
        roots
    }

    /// Cauchy bound: every real root lies in `[-R, R]`.
    pub fn root_bound(&self) -> f64 {
        match self.leading_term() {
            None => 0.0,
            Some((deg, lead)) => {
                1.0 + self.coeffs[..deg]
                    .iter()
                    .fold(0.0_f64, |m, c| m.max((c / lead).abs()))
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}x"),
                _ => format!("{c}x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Trigonometric polynomial `Σ_k cos_k cos(kθ) + sin_k sin(kθ)`.
///
/// `sin[0]` is kept at zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPoly {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len()).max(1);
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        sin[0] = 0.0;
        let mut t = TrigPoly { cos, sin };
        t.trim();
        t
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::new(vec![c], vec![0.0])
    }

    fn trim(&mut self) {
        while self.cos.len() > 1
            && self.cos.last() == Some(&0.0)
            && self.sin.last() == Some(&0.0)
        {
            self.cos.pop();
            self.sin.pop();
        }
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    fn cos_k(&self, k: usize) -> f64 {
        self.cos.get(k).copied().unwrap_or(0.0)
    }

    fn sin_k(&self, k: usize) -> f64 {
        self.sin.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.cos[0];
        for k in 1..self.cos.len() {
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += self.cos[k] * c + self.sin[k] * s;
        }
        acc
    }

    pub fn derivative(&self) -> TrigPoly {
        let n = self.cos.len();
        let cos = (0..n).map(|k| k as f64 * self.sin[k]).collect();
        let sin = (0..n).map(|k| -(k as f64) * self.cos[k]).collect();
        TrigPoly::new(cos, sin)
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.cos.len().max(other.cos.len());
        TrigPoly::new(
            (0..n).map(|k| self.cos_k(k) + other.cos_k(k)).collect(),
            (0..n).map(|k| self.sin_k(k) + other.sin_k(k)).collect(),
        )
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly::new(
            self.cos.iter().map(|c| c * s).collect(),
            self.sin.iter().map(|c| c * s).collect(),
        )
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.cos.len() + other.cos.len() - 1;
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for i in 0..self.cos.len() {
            for j in 0..other.cos.len() {
                let (ci, si) = (self.cos[i], self.sin[i]);
                let (cj, sj) = (other.cos[j], other.sin[j]);
                let sum = i + j;
                let diff = i.abs_diff(j);
                // cos a cos b = ½[cos(a−b) + cos(a+b)]
                cos[sum] += 0.5 * ci * cj;
                cos[diff] += 0.5 * ci * cj;
                // sin a sin b = ½[cos(a−b) − cos(a+b)]
                cos[sum] -= 0.5 * si * sj;
                cos[diff] += 0.5 * si * sj;
                // sin a cos b = ½[sin(a+b) + sin(a−b)]
                sin[sum] += 0.5 * si * cj + 0.5 * ci * sj;
                let sign = if i >= j { 1.0 } else { -1.0 };
                sin[diff] += 0.5 * sign * (si * cj - ci * sj);
            }
        }
        TrigPoly::new(cos, sin)
    }
}

/// A smooth coefficient function of one variable.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    Polynomial(Poly),
    Trig(TrigPoly),
}

impl Default for ScalarField {
    fn default() -> Self {
        ScalarField::Constant(0.0)
    }
}

impl From<Poly> for ScalarField {
    fn from(p: Poly) -> Self {
        ScalarField::Polynomial(p)
    }
}

impl From<TrigPoly> for ScalarField {
    fn from(t: TrigPoly) -> Self {
        ScalarField::Trig(t)
    }
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    pub fn poly(coeffs: &[f64]) -> Self {
        ScalarField::Polynomial(Poly::new(coeffs.to_vec()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Polynomial(p) => p.eval(x),
            ScalarField::Trig(t) => t.eval(x),
        }
    }

    pub fn derivative(&self) -> ScalarField {
        match self {
            ScalarField::Constant(_) => ScalarField::Constant(0.0),
            ScalarField::Polynomial(p) => ScalarField::Polynomial(p.derivative()),
            ScalarField::Trig(t) => ScalarField::Trig(t.derivative()),
        }
    }

    pub fn eval_d1(&self, x: f64) -> f64 {
        self.derivative().eval(x)
    }

    pub fn eval_d2(&self, x: f64) -> f64 {
        self.derivative().derivative().eval(x)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Constant(c) => *c == 0.0,
            ScalarField::Polynomial(p) => p.is_zero(),
            ScalarField::Trig(t) => t.cos.iter().chain(&t.sin).all(|&c| c == 0.0),
        }
    }

    pub fn is_periodic(&self) -> bool {
        match self {
            ScalarField::Constant(_) | ScalarField::Trig(_) => true,
            ScalarField::Polynomial(p) => p.degree().unwrap_or(0) == 0,
        }
    }

    /// Polynomial view (constants included); `None` for trigonometric fields.
    pub fn as_poly(&self) -> Option<Poly> {
        match self {
            ScalarField::Constant(c) => Some(Poly::constant(*c)),
            ScalarField::Polynomial(p) => Some(p.clone()),
            ScalarField::Trig(_) => None,
        }
    }

    pub fn as_trig(&self) -> Option<TrigPoly> {
        match self {
            ScalarField::Constant(c) => Some(TrigPoly::constant(*c)),
            ScalarField::Polynomial(p) if p.degree().unwrap_or(0) == 0 => {
                Some(TrigPoly::constant(p.coeff(0)))
            }
            ScalarField::Polynomial(_) => None,
            ScalarField::Trig(t) => Some(t.clone()),
        }
    }

    fn combine(
        &self,
        other: &ScalarField,
        constant: impl Fn(f64, f64) -> f64,
        poly: impl Fn(&Poly, &Poly) -> Poly,
        trig: impl Fn(&TrigPoly, &TrigPoly) -> TrigPoly,
    ) -> Result<ScalarField, ModelError> {
        use ScalarField::*;
        Ok(match (self, other) {
            (Constant(a), Constant(b)) => Constant(constant(*a, *b)),
            (Trig(_), _) | (_, Trig(_)) => {
                let a = self.as_trig().ok_or(ModelError::MixedFieldKinds)?;
                let b = other.as_trig().ok_or(ModelError::MixedFieldKinds)?;
                Trig(trig(&a, &b))
            }
            _ => {
                let a = self.as_poly().expect("non-trig field has a polynomial view");
                let b = other.as_poly().expect("non-trig field has a polynomial view");
                Polynomial(poly(&a, &b))
            }
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField, ModelError> {
        self.combine(other, |a, b| a + b, Poly::add, TrigPoly::add)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField, ModelError> {
        self.combine(other, |a, b| a * b, Poly::mul, TrigPoly::mul)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        match self {
            ScalarField::Constant(c) => ScalarField::Constant(c * s),
            ScalarField::Polynomial(p) => ScalarField::Polynomial(p.scale(s)),
            ScalarField::Trig(t) => ScalarField::Trig(t.scale(s)),
        }
    }

    /// Sum of an iterator of fields; the empty sum is the zero constant.
    pub fn sum<'a>(
        fields: impl IntoIterator<Item = &'a ScalarField>,
    ) -> Result<ScalarField, ModelError> {
        fields
            .into_iter()
            .try_fold(ScalarField::zero(), |acc, f| acc.add(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_d1(f: &ScalarField, x: f64, h: f64) -> f64 {
        (f.eval(x + h) - f.eval(x - h)) / (2.0 * h)
    }

    fn central_d2(f: &ScalarField, x: f64, h: f64) -> f64 {
        (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h)
    }

    #[test]
    fn poly_basics() {
        let p = Poly::new(vec![1.0, -2.0, 0.0, 3.0, 0.0]);
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 0.0, 9.0]);
        assert_eq!(p.antiderivative().derivative(), p);
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn leading_term_ignores_roundoff() {
        let p = Poly::new(vec![0.5, 0.0, 1e-18]);
        assert_eq!(p.leading_term(), Some((0, 0.5)));
        assert_eq!(Poly::zero().leading_term(), None);
    }

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::new(vec![-2.0, 0.0, 1.0]);
        let r = p.real_roots_in(-p.root_bound(), p.root_bound(), 1000);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2f64.sqrt()).abs() < 1e-12);
        assert!((r[1] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isolated_roots() {
        // (x − 1)(x − 1.001)(x + 3)(x² + 1)
        let p = Poly::new(vec![-1.0, 1.0])
            .mul(&Poly::new(vec![-1.001, 1.0]))
            .mul(&Poly::new(vec![3.0, 1.0]))
            .mul(&Poly::new(vec![1.0, 0.0, 1.0]));
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-3.0, 1.0, 1.001]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(Poly::new(vec![1.0, 0.0, 1.0]).real_roots().is_empty());
    }

    #[test]
    fn trig_product_identities() {
        // cos θ · sin θ = ½ sin 2θ
        let c = TrigPoly::new(vec![0.0, 1.0], vec![]);
        let s = TrigPoly::new(vec![0.0], vec![0.0, 1.0]);
        let cs = c.mul(&s);
        assert!((cs.sin_coeffs()[2] - 0.5).abs() < 1e-15);
        // sin² θ = ½ − ½ cos 2θ
        let ss = s.mul(&s);
        assert!((ss.cos_coeffs()[0] - 0.5).abs() < 1e-15);
        assert!((ss.cos_coeffs()[2] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixing_kinds_is_rejected() {
        let p = ScalarField::poly(&[0.0, 1.0]);
        let t = ScalarField::Trig(TrigPoly::new(vec![0.0, 1.0], vec![]));
        assert!(matches!(p.add(&t), Err(ModelError::MixedFieldKinds)));
        // constants mix with either
        assert!(ScalarField::Constant(2.0).mul(&t).is_ok());
    }

    proptest! {
        #[test]
        fn poly_derivatives_match_central_differences(
            coeffs in prop::collection::vec(-2.0f64..2.0, 1..9),
            x in -1.5f64..1.5,
        ) {
            let f = ScalarField::poly(&coeffs);
            let h = 1e-3;
            let scale = 1.0 + coeffs.iter().map(|c| c.abs()).sum::<f64>() * 100.0;
            prop_assert!((f.eval_d1(x) - central_d1(&f, x, h)).abs() < 1e-4 * scale);
            prop_assert!((f.eval_d2(x) - central_d2(&f, x, h)).abs() < 1e-3 * scale);
        }

        #[test]
        fn trig_derivatives_and_products(
            ca in prop::collection::vec(-1.0f64..1.0, 1..4),
            sa in prop::collection::vec(-1.0f64..1.0, 1..4),
            cb in prop::collection::vec(-1.0f64..1.0, 1..4),
            sb in prop::collection::vec(-1.0f64..1.0, 1..4),
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let a = ScalarField::Trig(TrigPoly::new(ca, sa));
            let b = ScalarField::Trig(TrigPoly::new(cb, sb));
            let h = 1e-4;
            prop_assert!((a.eval_d1(theta) - central_d1(&a, theta, h)).abs() < 1e-6);
            prop_assert!((a.eval_d2(theta) - central_d2(&a, theta, 1e-3)).abs() < 1e-3);
            let prod = a.mul(&b).unwrap();
            prop_assert!((prod.eval(theta) - a.eval(theta) * b.eval(theta)).abs() < 1e-12);
            let tau = std::f64::consts::TAU;
            prop_assert!((prod.eval(0.0) - prod.eval(tau)).abs() < 1e-12);
        }

        #[test]
        fn poly_product_evaluates_pointwise(
            a in prop::collection::vec(-2.0f64..2.0, 1..5),
            b in prop::collection::vec(-2.0f64..2.0, 1..5),
            x in -2.0f64..2.0,
        ) {
            let (pa, pb) = (Poly::new(a), Poly::new(b));
            let lhs = pa.mul(&pb).eval(x);
            prop_assert!((lhs - pa.eval(x) * pb.eval(x)).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
