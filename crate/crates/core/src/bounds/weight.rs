use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `V ≡ 1`.
    Unit,
    /// `V = e^{γx²}`.
    ExpQuadratic,
    /// `V = e^{γx⁴}`.
    ExpQuartic,
    /// `V = (1 + x²)^α`.
    Poly,
}

impl WeightFamily {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "unit" | "none" => Some(Self::Unit),
            "exp_quadratic" => Some(Self::ExpQuadratic),
            "exp_quartic" => Some(Self::ExpQuartic),
            "poly" => Some(Self::Poly),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::ExpQuadratic => "exp_quadratic",
            Self::ExpQuartic => "exp_quartic",
            Self::Poly => "poly",
        }
    }

    fn param_name(&self) -> &'static str {
        match self {
            Self::Poly => "alpha",
            _ => "gamma",
        }
    }
}

/// Parametric Lyapunov weight with closed-form `U = log V` and its derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovWeight {
    pub family: WeightFamily,
    /// `γ` for the exponential families, `α` for the polynomial one; ignored for `Unit`.
    pub param: f64,
}

impl LyapunovWeight {
    pub const UNIT: LyapunovWeight = LyapunovWeight {
        family: WeightFamily::Unit,
        param: 0.0,
    };

    /// Panics unless `param > 0` (families other than `Unit`).
    pub fn new(family: WeightFamily, param: f64) -> Self {
        assert!(
            family == WeightFamily::Unit || (param > 0.0 && param.is_finite()),
            "weight parameter must be positive, got {param}"
        );
        Self { family, param }
    }

    pub fn exp_quadratic(gamma: f64) -> Self {
        Self::new(WeightFamily::ExpQuadratic, gamma)
    }

    pub fn exp_quartic(gamma: f64) -> Self {
        Self::new(WeightFamily::ExpQuartic, gamma)
    }

    pub fn poly(alpha: f64) -> Self {
        Self::new(WeightFamily::Poly, alpha)
    }

    /// `V^β`, which stays in the same family.
    pub fn power(&self, beta: f64) -> Self {
        Self {
            family: self.family,
            param: self.param * beta,
        }
    }

    /// `U` as a polynomial for the exponential families and `Unit`.
    pub fn log_poly(&self) -> Option<Poly> {
        match self.family {
            WeightFamily::Unit => Some(Poly::zero()),
            WeightFamily::ExpQuadratic => Some(Poly::monomial(self.param, 2)),
            WeightFamily::ExpQuartic => Some(Poly::monomial(self.param, 4)),
            WeightFamily::Poly => None,
        }
    }

    pub fn u(&self, x: f64) -> f64 {
        let g = self.param;
        match self.family {
            WeightFamily::Unit => 0.0,
            WeightFamily::ExpQuadratic => g * x * x,
            WeightFamily::ExpQuartic => g * x.powi(4),
            WeightFamily::Poly => g * x.mul_add(x, 1.0).ln(),
        }
    }

    pub fn u1(&self, x: f64) -> f64 {
        let g = self.param;
        match self.family {
            WeightFamily::Unit => 0.0,
            WeightFamily::ExpQuadratic => 2.0 * g * x,
            WeightFamily::ExpQuartic => 4.0 * g * x.powi(3),
            WeightFamily::Poly => 2.0 * g * x / (1.0 + x * x),
        }
    }

    pub fn u2(&self, x: f64) -> f64 {
        let g = self.param;
        match self.family {
            WeightFamily::Unit => 0.0,
            WeightFamily::ExpQuadratic => 2.0 * g,
            WeightFamily::ExpQuartic => 12.0 * g * x * x,
            WeightFamily::Poly => {
                let s = 1.0 + x * x;
                2.0 * g * (1.0 - x * x) / (s * s)
            }
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        self.u(x).exp()
    }

    /// `name(param=value)` for reports and CSV columns.
    pub fn params_string(&self) -> String {
        match self.family {
            WeightFamily::Unit => "unit".into(),
            f => format!("{}({}={})", f.name(), f.param_name(), self.param),
        }
    }
}

impl fmt::Display for LyapunovWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.params_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> impl Strategy<Value = LyapunovWeight> {
        (0usize..3, 0.05f64..2.0).prop_map(|(k, g)| match k {
            0 => LyapunovWeight::exp_quadratic(g),
            1 => LyapunovWeight::exp_quartic(g),
            _ => LyapunovWeight::poly(g),
        })
    }

    #[test]
    fn parse_names() {
        for f in [WeightFamily::Unit, WeightFamily::ExpQuadratic, WeightFamily::ExpQuartic, WeightFamily::Poly] {
            assert_eq!(WeightFamily::parse(f.name()), Some(f));
        }
        assert_eq!(WeightFamily::parse("cosh"), None);
    }

    #[test]
    #[should_panic]
    fn zero_parameter_is_rejected() {
        LyapunovWeight::exp_quadratic(0.0);
    }

    proptest! {
        #[test]
        fn weight_at_least_one(w in families(), x in -5.0f64..5.0) {
            prop_assert!(w.v(x) >= 1.0);
        }

        #[test]
        fn derivatives_match_differences(w in families(), x in -2.0f64..2.0) {
            let h = 1e-4;
            let d1 = (w.u(x + h) - w.u(x - h)) / (2.0 * h);
            let d2 = (w.u1(x + h) - w.u1(x - h)) / (2.0 * h);
            prop_assert!((d1 - w.u1(x)).abs() < 1e-6 * (1.0 + d1.abs()));
            prop_assert!((d2 - w.u2(x)).abs() < 1e-6 * (1.0 + d2.abs()));
        }
    }
}
